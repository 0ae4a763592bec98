#include "epiflow/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "epiflow/dynamic_sim.hpp"
#include "epiflow/epidemic_chain.hpp"
#include "epiflow/graph_model.hpp"
#include "epiflow/num_format.hpp"
#include "epiflow/reference.hpp"
#include "epiflow/rng.hpp"
#include "epiflow/trace_replay.hpp"

namespace epiflow::cli {

namespace {

LowerBoundMode parse_mode(const std::string& name) {
    return name == "verbatim" ? LowerBoundMode::verbatim : LowerBoundMode::corrected;
}

// One CSV row of the analytic schema: exact rows leave the upper column
// empty, bound rows carry lower in the value column.
std::string analytic_row(double alpha, int delay, int n, double p_up, double p_down,
                         const DeliveryResult& r) {
    std::string row = format_double(alpha) + ',' + std::to_string(delay) + ',' +
                      std::to_string(n) + ',' + format_double(p_up) + ',' + format_double(p_down);
    if (r.kind == DeliveryKind::exact)
        row += ",exact," + format_double(r.value) + ',';
    else
        row += ",bounds," + format_double(r.lower) + ',' + format_double(r.upper);
    return row;
}

std::string montecarlo_row(double alpha, int delay, int n, double p_up, double p_down,
                           const SimEstimate& est) {
    return format_double(alpha) + ',' + std::to_string(delay) + ',' + std::to_string(n) + ',' +
           format_double(p_up) + ',' + format_double(p_down) + ",montecarlo," +
           format_double(est.delivery_ratio) + ",," + std::to_string(est.runs) + ',' +
           format_double(est.std_error);
}

constexpr const char* kAnalyticHeader = "alpha,delay,n,p_up,p_down,kind,value,upper";
constexpr const char* kSimulateHeader = "alpha,delay,n,p_up,p_down,kind,value,upper,runs,std_error";

// Common numeric flags shared by the model-driven subcommands.
struct ModelArgs {
    int n = 20;
    double p_up = 0.05;
    double p_down = 0.5;
    double tau = 1.0;
    double alpha = 1.0;
    int delay = 5;
};

void add_model_flags(CLI::App* cmd, ModelArgs& a, bool with_query) {
    cmd->add_option("--n", a.n, "number of nodes")
        ->check(CLI::Range(2, 100000))
        ->capture_default_str();
    cmd->add_option("--p-up", a.p_up, "per-step probability a down link comes up")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--p-down", a.p_down, "per-step probability an up link goes down")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--tau", a.tau, "seconds per time step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    if (with_query) {
        cmd->add_option("--alpha", a.alpha, "bundle size in units of link size")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--delay", a.delay, "maximum delay in time steps")
            ->check(CLI::Range(0, 1 << 28))
            ->capture_default_str();
    }
}

// Resolves --out; "-" means the stream handed to run().
class OutputTarget {
  public:
    OutputTarget(const std::string& path, std::ostream& fallback) {
        if (path == "-") {
            stream_ = &fallback;
            return;
        }
        file_.open(path);
        if (!file_) throw std::runtime_error("cannot open output file '" + path + "'");
        stream_ = &file_;
    }

    std::ostream& get() { return *stream_; }

  private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

ParsedTrace load_trace(const std::string& path, double tau) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file '" + path + "'");
    return parse_trace(in, tau);
}

struct SweepPoint {
    double alpha;
    int delay;
    int n;
    double p_up;
    double p_down;
};

int integral_value(double v, const char* variable) {
    if (v != std::floor(v) || v < 0.0 || v > 1e9)
        throw std::invalid_argument("swept " + std::string(variable) + " value " +
                                    format_double(v) + " is not a non-negative integer");
    return static_cast<int>(v);
}

void check_unit_range(double p, const char* name, const char* variable, double swept) {
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("swept " + std::string(variable) + " value " +
                                    format_double(swept) + " puts " + name + " at " +
                                    format_double(p) + ", outside (0, 1]");
}

SweepPoint sweep_point(const std::string& variable, double value, const ModelArgs& base) {
    SweepPoint pt{base.alpha, base.delay, base.n, base.p_up, base.p_down};
    if (variable == "alpha") {
        if (!(value > 0.0))
            throw std::invalid_argument("swept alpha value must be positive, got " +
                                        format_double(value));
        pt.alpha = value;
    } else if (variable == "delay") {
        pt.delay = integral_value(value, "delay");
    } else if (variable == "n") {
        pt.n = integral_value(value, "n");
        if (pt.n < 2)
            throw std::invalid_argument("swept n value " + format_double(value) + " is below 2");
    } else if (variable == "contact_time") {
        // Mean contact time E(T_up) = tau / p_down; the stationary up
        // probability stays fixed so mean degree is unchanged.
        const EdgeMarkovParams params(base.p_up, base.p_down, base.tau);
        const double pi_up = stationary_stats(params).pi_up;
        pt.p_down = base.tau / value;
        check_unit_range(pt.p_down, "p_down", "contact_time", value);
        pt.p_up = pt.p_down * pi_up / (1.0 - pi_up);
        check_unit_range(pt.p_up, "p_up", "contact_time", value);
    } else {  // degree
        const double pi_up = value / static_cast<double>(base.n - 1);
        if (!(pi_up > 0.0) || pi_up >= 1.0)
            throw std::invalid_argument("swept degree value " + format_double(value) +
                                        " needs stationary up probability in (0, 1), got " +
                                        format_double(pi_up));
        pt.p_up = base.p_down * pi_up / (1.0 - pi_up);
        check_unit_range(pt.p_up, "p_up", "degree", value);
    }
    return pt;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Delivery-ratio toolkit for epidemic routing on edge-Markov dynamic graphs"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from a key=value file");

    std::string bound_mode = "corrected";
    std::string out_path = "-";

    // analytic
    auto* analytic = app.add_subcommand("analytic", "exact delivery ratio (bounds when alpha > 1)");
    ModelArgs an_args;
    add_model_flags(analytic, an_args, true);
    analytic->add_option("--lower-bound-mode", bound_mode, "alpha > 1 lower bound variant")
        ->transform(CLI::IsMember({"corrected", "verbatim"}))
        ->capture_default_str();
    analytic->add_option("--out", out_path, "output path, - for stdout")->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "analytic rows over a swept variable");
    ModelArgs sw_args;
    add_model_flags(sweep, sw_args, true);
    std::string sw_variable;
    std::vector<double> sw_values;
    bool sw_montecarlo = false;
    long sw_runs = 10000;
    std::uint64_t sw_seed = 1;
    sweep->add_option("--variable", sw_variable, "which parameter varies")
        ->required()
        ->transform(CLI::IsMember({"alpha", "delay", "n", "contact_time", "degree"}));
    sweep->add_option("--values", sw_values, "comma-separated swept values")
        ->required()
        ->delimiter(',');
    sweep->add_flag("--montecarlo", sw_montecarlo, "add a simulated row per point");
    sweep->add_option("--runs", sw_runs, "trials per simulated point")
        ->check(CLI::Range(1L, std::numeric_limits<long>::max()))
        ->capture_default_str();
    sweep->add_option("--seed", sw_seed, "master seed for simulated rows")->capture_default_str();
    sweep->add_option("--lower-bound-mode", bound_mode, "alpha > 1 lower bound variant")
        ->transform(CLI::IsMember({"corrected", "verbatim"}))
        ->capture_default_str();
    sweep->add_option("--out", out_path, "output path, - for stdout")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo delivery estimate");
    ModelArgs si_args;
    add_model_flags(simulate, si_args, true);
    long si_runs = 10000;
    std::uint64_t si_seed = 1;
    simulate->add_option("--runs", si_runs, "number of independent trials")
        ->check(CLI::Range(1L, std::numeric_limits<long>::max()))
        ->capture_default_str();
    simulate->add_option("--seed", si_seed, "master seed")->capture_default_str();
    simulate->add_option("--out", out_path, "output path, - for stdout")->capture_default_str();

    // estimate
    auto* estimate = app.add_subcommand("estimate", "fit chain parameters to a contact trace");
    std::string es_trace;
    double es_tau = 1.0;
    int es_n = 0;
    std::string es_format = "report";
    estimate->add_option("--trace", es_trace, "contact trace CSV path")->required();
    estimate->add_option("--tau", es_tau, "sampling period in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    estimate->add_option("--n", es_n, "override node count (0 = nodes seen in trace)")
        ->check(CLI::Range(0, 100000))
        ->capture_default_str();
    estimate->add_option("--format", es_format, "report or csv")
        ->transform(CLI::IsMember({"report", "csv"}))
        ->capture_default_str();
    estimate->add_option("--out", out_path, "output path, - for stdout")->capture_default_str();

    // replay
    auto* replay = app.add_subcommand("replay", "flood recorded contacts from batched injections");
    std::string re_trace;
    double re_tau = 1.0;
    int re_n = 0;
    std::vector<double> re_alphas{1.0};
    std::vector<double> re_delays;
    double re_horizon = 0.0;
    double re_interval = 0.0;
    int re_pairs = 1;
    std::uint64_t re_seed = 1;
    bool re_with_analytic = false;
    replay->add_option("--trace", re_trace, "contact trace CSV path")->required();
    replay->add_option("--tau", re_tau, "sampling period in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    replay->add_option("--n", re_n, "override node count for analytic rows (0 = as parsed)")
        ->check(CLI::Range(0, 100000))
        ->capture_default_str();
    replay->add_option("--alpha", re_alphas, "bundle sizes, comma separated")->delimiter(',');
    replay->add_option("--delay", re_delays, "maximum delays in seconds, comma separated")
        ->required()
        ->delimiter(',');
    replay->add_option("--horizon", re_horizon, "inject batches over the first horizon seconds")
        ->required()
        ->check(CLI::PositiveNumber);
    replay->add_option("--injection-interval", re_interval, "seconds between batches")
        ->required()
        ->check(CLI::PositiveNumber);
    replay->add_option("--pairs", re_pairs, "source/destination pairs per batch")
        ->check(CLI::Range(1, 1 << 20))
        ->capture_default_str();
    replay->add_option("--seed", re_seed, "master seed")->capture_default_str();
    replay->add_flag("--with-analytic", re_with_analytic,
                     "append analytic rows from parameters estimated off the trace");
    replay->add_option("--lower-bound-mode", bound_mode, "alpha > 1 lower bound variant")
        ->transform(CLI::IsMember({"corrected", "verbatim"}))
        ->capture_default_str();
    replay->add_option("--out", out_path, "output path, - for stdout")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (analytic->parsed()) {
            OutputTarget target(out_path, out);
            const EdgeMarkovParams params(an_args.p_up, an_args.p_down, an_args.tau);
            const DeliveryResult r = delivery_ratio(
                params, {an_args.n, an_args.alpha, an_args.delay}, parse_mode(bound_mode));
            target.get() << kAnalyticHeader << '\n'
                         << analytic_row(an_args.alpha, an_args.delay, an_args.n, an_args.p_up,
                                         an_args.p_down, r)
                         << '\n';
        } else if (sweep->parsed()) {
            OutputTarget target(out_path, out);
            std::vector<std::string> rows;
            for (std::size_t idx = 0; idx < sw_values.size(); ++idx) {
                const SweepPoint pt = sweep_point(sw_variable, sw_values[idx], sw_args);
                const EdgeMarkovParams params(pt.p_up, pt.p_down, sw_args.tau);
                const DeliveryResult r =
                    delivery_ratio(params, {pt.n, pt.alpha, pt.delay}, parse_mode(bound_mode));
                std::string row = analytic_row(pt.alpha, pt.delay, pt.n, pt.p_up, pt.p_down, r);
                if (sw_montecarlo) row += ",,";
                rows.push_back(std::move(row));
                if (sw_montecarlo) {
                    SimConfig config;
                    config.runs = sw_runs;
                    config.seed = substream_seed(sw_seed, idx);
                    config.alpha = pt.alpha;
                    config.max_delay = pt.delay;
                    const SimEstimate est = estimate_delivery(params, pt.n, config);
                    rows.push_back(
                        montecarlo_row(pt.alpha, pt.delay, pt.n, pt.p_up, pt.p_down, est));
                }
            }
            target.get() << (sw_montecarlo ? kSimulateHeader : kAnalyticHeader) << '\n';
            for (const auto& row : rows) target.get() << row << '\n';
        } else if (simulate->parsed()) {
            OutputTarget target(out_path, out);
            const EdgeMarkovParams params(si_args.p_up, si_args.p_down, si_args.tau);
            SimConfig config;
            config.runs = si_runs;
            config.seed = si_seed;
            config.alpha = si_args.alpha;
            config.max_delay = si_args.delay;
            const SimEstimate est = estimate_delivery(params, si_args.n, config);
            target.get() << kSimulateHeader << '\n'
                         << montecarlo_row(si_args.alpha, si_args.delay, si_args.n, si_args.p_up,
                                           si_args.p_down, est)
                         << '\n';
        } else if (estimate->parsed()) {
            OutputTarget target(out_path, out);
            const ParsedTrace trace = load_trace(es_trace, es_tau);
            TraceStats stats = trace_stats(trace.graph);
            if (es_n > 0) {
                // Degree was averaged over the nodes seen in the trace;
                // rescale when the deployment had silent nodes too.
                stats.mean_degree *= static_cast<double>(stats.n_nodes) / es_n;
                stats.n_nodes = es_n;
            }
            const EdgeMarkovParams params = estimate_params(stats);
            const StationaryStats st = stationary_stats(params);
            if (es_format == "csv") {
                target.get() << "n_nodes,tau,mean_link_lifetime,mean_degree,p_up,p_down\n"
                             << stats.n_nodes << ',' << format_double(stats.tau) << ','
                             << format_double(stats.mean_link_lifetime) << ','
                             << format_double(stats.mean_degree) << ','
                             << format_double(params.p_up) << ',' << format_double(params.p_down)
                             << '\n';
            } else {
                target.get() << "n_nodes=" << stats.n_nodes << '\n'
                             << "tau=" << format_double(stats.tau) << '\n'
                             << "mean_link_lifetime=" << format_double(stats.mean_link_lifetime)
                             << '\n'
                             << "mean_degree=" << format_double(stats.mean_degree) << '\n'
                             << "p_up=" << format_double(params.p_up) << '\n'
                             << "p_down=" << format_double(params.p_down) << '\n'
                             << "pi_up=" << format_double(st.pi_up) << '\n'
                             << "expected_contact_time=" << format_double(st.e_t_up) << '\n'
                             << "expected_intercontact_time=" << format_double(st.e_t_down) << '\n'
                             << "censoring=final runs counted at observed length\n";
            }
        } else if (replay->parsed()) {
            OutputTarget target(out_path, out);
            const ParsedTrace trace = load_trace(re_trace, re_tau);
            ReplayConfig config;
            config.horizon = re_horizon;
            config.injection_interval = re_interval;
            config.pairs_per_batch = re_pairs;
            config.alpha_values = re_alphas;
            config.delay_values = re_delays;
            config.seed = re_seed;
            const std::vector<ReplayCell> cells = replay_experiment(trace.graph, config);

            target.get() << "alpha,delay_seconds,kind,delivery_ratio,n_samples\n";
            TraceStats stats{};
            EdgeMarkovParams est_params(0.5, 0.5, re_tau);
            int analytic_n = 0;
            if (re_with_analytic) {
                stats = trace_stats(trace.graph);
                if (re_n > 0) {
                    stats.mean_degree *= static_cast<double>(stats.n_nodes) / re_n;
                    stats.n_nodes = re_n;
                }
                est_params = estimate_params(stats);
                analytic_n = stats.n_nodes;
            }
            for (const ReplayCell& cell : cells) {
                target.get() << format_double(cell.alpha) << ',' << format_double(cell.delay)
                             << ",replay," << format_double(cell.delivery_ratio()) << ','
                             << cell.samples << '\n';
                if (!re_with_analytic) continue;
                const int d_steps = static_cast<int>(std::llround(cell.delay / re_tau));
                const DeliveryResult r = delivery_ratio(
                    est_params, {analytic_n, cell.alpha, d_steps}, parse_mode(bound_mode));
                if (r.kind == DeliveryKind::exact) {
                    target.get() << format_double(cell.alpha) << ',' << format_double(cell.delay)
                                 << ",exact," << format_double(r.value) << ",\n";
                } else {
                    target.get() << format_double(cell.alpha) << ',' << format_double(cell.delay)
                                 << ",lower," << format_double(r.lower) << ",\n"
                                 << format_double(cell.alpha) << ',' << format_double(cell.delay)
                                 << ",upper," << format_double(r.upper) << ",\n";
                }
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace epiflow::cli
