#include "epiflow/trace_replay.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

#include "epiflow/num_format.hpp"
#include "epiflow/rng.hpp"

namespace epiflow {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail_line(long line_no, const std::string& what) {
    throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + what);
}

double parse_time(const std::string& field, long line_no) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        fail_line(line_no, "bad time field '" + field + "'");
    if (!std::isfinite(value) || value < 0.0)
        fail_line(line_no, "time must be finite and non-negative, got '" + field + "'");
    return value;
}

// Sampling-period index containing the instant. Times sitting a hair below
// a period boundary (fp noise from seconds = k*tau arithmetic) snap up.
int bucket_of(double time, double tau, long line_no) {
    const double q = time / tau;
    double k = std::floor(q);
    if (q - k > 1.0 - 1e-9) k += 1.0;
    if (k > 1e9) fail_line(line_no, "time too far out: '" + format_double(time) + "'");
    return static_cast<int>(k);
}

} // namespace

ParsedTrace parse_trace(std::istream& input, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");

    struct RawRecord {
        int bucket;
        int a;
        int b;
    };
    std::vector<RawRecord> records;
    std::unordered_map<std::string, int> index_of;
    std::vector<std::string> names;

    std::string line;
    long line_no = 0;
    int max_bucket = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;

        std::string fields[3];
        std::size_t pos = 0;
        int n_fields = 0;
        while (true) {
            const auto comma = stripped.find(',', pos);
            const std::string piece =
                trim(stripped.substr(pos, comma == std::string::npos ? comma : comma - pos));
            if (n_fields < 3) fields[n_fields] = piece;
            ++n_fields;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (n_fields != 3) fail_line(line_no, "expected time,node_a,node_b");
        if (fields[1].empty() || fields[2].empty()) fail_line(line_no, "empty node identifier");
        if (fields[1] == fields[2]) fail_line(line_no, "self contact '" + fields[1] + "'");

        const double time = parse_time(fields[0], line_no);
        const int bucket = bucket_of(time, tau, line_no);

        int ids[2];
        for (int f = 0; f < 2; ++f) {
            auto [it, inserted] = index_of.try_emplace(fields[1 + f], static_cast<int>(names.size()));
            if (inserted) names.push_back(fields[1 + f]);
            ids[f] = it->second;
        }
        records.push_back({bucket, std::min(ids[0], ids[1]), std::max(ids[0], ids[1])});
        max_bucket = std::max(max_bucket, bucket);
    }
    if (records.empty()) throw std::runtime_error("trace contains no contact records");

    ParsedTrace out;
    out.node_names = std::move(names);
    out.graph.n_nodes = static_cast<int>(out.node_names.size());
    out.graph.tau = tau;
    out.graph.snapshots.resize(static_cast<std::size_t>(max_bucket) + 1);
    for (const auto& r : records) out.graph.snapshots[r.bucket].emplace_back(r.a, r.b);
    for (auto& snap : out.graph.snapshots) {
        std::sort(snap.begin(), snap.end());
        snap.erase(std::unique(snap.begin(), snap.end()), snap.end());
    }
    return out;
}

void serialize_trace(const DynamicGraph& graph, std::ostream& output) {
    for (int k = 0; k < graph.steps(); ++k) {
        const std::string stamp = format_double(k * graph.tau);
        for (const auto& [a, b] : graph.snapshots[k])
            output << stamp << ',' << a << ',' << b << '\n';
    }
}

TraceStats trace_stats(const DynamicGraph& graph) {
    if (graph.n_nodes < 2) throw std::invalid_argument("need at least two nodes");
    if (graph.steps() < 1) throw std::invalid_argument("need at least one snapshot");

    // Walk snapshots merging each sorted edge list against the runs still
    // open from the previous step. Runs open when the trace ends count at
    // their observed (censored) length.
    using Edge = std::pair<int, int>;
    std::vector<std::pair<Edge, long>> open;
    std::vector<std::pair<Edge, long>> next;
    long run_total = 0;
    long run_count = 0;
    long edge_slots = 0;
    for (const auto& snap : graph.snapshots) {
        edge_slots += static_cast<long>(snap.size());
        next.clear();
        std::size_t io = 0;
        std::size_t ic = 0;
        while (io < open.size() || ic < snap.size()) {
            if (io == open.size() || (ic < snap.size() && snap[ic] < open[io].first)) {
                next.emplace_back(snap[ic], 1);
                ++ic;
            } else if (ic == snap.size() || open[io].first < snap[ic]) {
                run_total += open[io].second;
                ++run_count;
                ++io;
            } else {
                next.emplace_back(snap[ic], open[io].second + 1);
                ++io;
                ++ic;
            }
        }
        open.swap(next);
    }
    for (const auto& [edge, len] : open) {
        run_total += len;
        ++run_count;
    }

    TraceStats stats;
    stats.n_nodes = graph.n_nodes;
    stats.tau = graph.tau;
    stats.mean_link_lifetime =
        run_count > 0 ? graph.tau * static_cast<double>(run_total) / static_cast<double>(run_count)
                      : 0.0;
    stats.mean_degree = 2.0 * static_cast<double>(edge_slots) /
                        (static_cast<double>(graph.n_nodes) * static_cast<double>(graph.steps()));
    return stats;
}

namespace {

// Seconds -> whole sampling periods; anything that is not a multiple of tau
// (up to fp tolerance) is a configuration error.
int seconds_to_steps(double seconds, double tau, const char* what) {
    const double ratio = seconds / tau;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-6 * std::max(1.0, std::abs(ratio)))
        throw std::invalid_argument(std::string(what) + " (" + format_double(seconds) +
                                    ") is not a multiple of the sampling period " +
                                    format_double(tau));
    if (rounded < 0.0) throw std::invalid_argument(std::string(what) + " must be non-negative");
    if (rounded > 2e9) throw std::invalid_argument(std::string(what) + " too large");
    return static_cast<int>(rounded);
}

} // namespace

std::vector<ReplayCell> replay_experiment(const DynamicGraph& graph, const ReplayConfig& config) {
    const int n = graph.n_nodes;
    if (n < 2) throw std::invalid_argument("need at least two nodes");
    if (config.pairs_per_batch < 1) throw std::invalid_argument("pairs_per_batch must be >= 1");
    if (config.alpha_values.empty()) throw std::invalid_argument("no bundle sizes given");
    if (config.delay_values.empty()) throw std::invalid_argument("no delay values given");
    for (double a : config.alpha_values)
        if (!(a > 0.0)) throw std::invalid_argument("bundle size must be positive");
    if (!(config.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");

    const int interval_steps =
        seconds_to_steps(config.injection_interval, graph.tau, "injection interval");
    if (interval_steps < 1)
        throw std::invalid_argument("injection interval must be at least one sampling period");

    std::vector<int> delay_steps;
    delay_steps.reserve(config.delay_values.size());
    int max_delay = 0;
    for (double d : config.delay_values) {
        delay_steps.push_back(seconds_to_steps(d, graph.tau, "delay"));
        max_delay = std::max(max_delay, delay_steps.back());
    }

    const long n_batches =
        static_cast<long>(std::ceil(config.horizon / config.injection_interval - 1e-9));
    if (n_batches < 1) throw std::invalid_argument("horizon admits no injection batch");
    const long last_start = (n_batches - 1) * static_cast<long>(interval_steps);
    if (last_start + max_delay > graph.steps())
        throw std::invalid_argument("trace too short: last batch needs " +
                                    std::to_string(last_start + max_delay) + " steps, have " +
                                    std::to_string(graph.steps()));

    const std::size_t n_alpha = config.alpha_values.size();
    const std::size_t n_delay = delay_steps.size();
    const std::size_t n_cells = n_alpha * n_delay;
    std::vector<long> hits(static_cast<std::size_t>(n_batches) * n_cells, 0);

#pragma omp parallel for schedule(static)
    for (long b = 0; b < n_batches; ++b) {
        Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(b)));
        const int start_step = static_cast<int>(b) * interval_steps;
        long* batch_hits = hits.data() + static_cast<std::size_t>(b) * n_cells;

        for (int p = 0; p < config.pairs_per_batch; ++p) {
            const int source = uniform_below(rng, n);
            int dest = uniform_below(rng, n - 1);
            if (dest >= source) ++dest;

            for (std::size_t ia = 0; ia < n_alpha; ++ia) {
                if (max_delay == 0) break;
                const FloodOutcome outcome =
                    flood(graph, source, dest, config.alpha_values[ia], max_delay, start_step);
                if (!outcome.delivery_step) continue;
                for (std::size_t id = 0; id < n_delay; ++id)
                    if (*outcome.delivery_step <= delay_steps[id]) ++batch_hits[ia * n_delay + id];
            }
        }
    }

    std::vector<ReplayCell> cells(n_cells);
    for (std::size_t ia = 0; ia < n_alpha; ++ia) {
        for (std::size_t id = 0; id < n_delay; ++id) {
            ReplayCell& cell = cells[ia * n_delay + id];
            cell.alpha = config.alpha_values[ia];
            cell.delay = config.delay_values[id];
            cell.samples = n_batches * config.pairs_per_batch;
            for (long b = 0; b < n_batches; ++b)
                cell.successes += hits[static_cast<std::size_t>(b) * n_cells + ia * n_delay + id];
        }
    }
    return cells;
}

} // namespace epiflow
