#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "epiflow/cli.hpp"

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("epiflow");
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code =
        epiflow::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

const std::string kTrace = std::string(EPIFLOW_DATA_DIR) + "/example_trace.csv";

} // namespace

TEST_CASE("analytic emits exact rows for unit bundles") {
    const auto r = run_cli({"analytic", "--n", "3", "--p-up", "0.05", "--p-down", "0.5",
                            "--alpha", "1", "--delay", "1"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "alpha,delay,n,p_up,p_down,kind,value,upper");
    const auto f = split_fields(lines[1]);
    REQUIRE(f.size() == 8);
    CHECK(f[0] == "1");
    CHECK(f[1] == "1");
    CHECK(f[2] == "3");
    CHECK(f[5] == "exact");
    CHECK(std::abs(std::stod(f[6]) - 1.0 / 11.0) <= 1e-12);
    CHECK(f[7].empty());

    const auto r2 = run_cli({"analytic", "--n", "3", "--p-up", "0.05", "--p-down", "0.5",
                             "--alpha", "1", "--delay", "2"});
    REQUIRE(r2.code == 0);
    const auto f2 = split_fields(split_lines(r2.out)[1]);
    CHECK(std::abs(std::stod(f2[6]) - 191.0 / 1331.0) <= 1e-12);

    const auto r0 = run_cli({"analytic", "--n", "3", "--p-up", "0.05", "--p-down", "0.5",
                             "--alpha", "1", "--delay", "0"});
    REQUIRE(r0.code == 0);
    CHECK(split_fields(split_lines(r0.out)[1])[6] == "0");
}

TEST_CASE("analytic emits bound rows for large bundles") {
    const auto r = run_cli({"analytic", "--n", "4", "--p-up", "0.05", "--p-down", "0.5",
                            "--alpha", "2", "--delay", "6"});
    REQUIRE(r.code == 0);
    const auto f = split_fields(split_lines(r.out)[1]);
    REQUIRE(f.size() == 8);
    CHECK(f[5] == "bounds");
    const double lower = std::stod(f[6]);
    const double upper = std::stod(f[7]);
    CHECK(lower > 0.0);
    CHECK(lower <= upper);
    CHECK(upper <= 1.0);

    const auto rv = run_cli({"analytic", "--n", "4", "--p-up", "0.05", "--p-down", "0.5",
                             "--alpha", "2", "--delay", "6", "--lower-bound-mode", "verbatim"});
    REQUIRE(rv.code == 0);
    const auto fv = split_fields(split_lines(rv.out)[1]);
    CHECK(std::stod(fv[6]) <= lower + 1e-15);
    CHECK(std::stod(fv[7]) == upper);

    // fewer steps than one transfer: both bounds collapse to zero
    const auto rz = run_cli({"analytic", "--n", "4", "--alpha", "3", "--delay", "2"});
    REQUIRE(rz.code == 0);
    const auto fz = split_fields(split_lines(rz.out)[1]);
    CHECK(std::stod(fz[6]) == 0.0);
    CHECK(std::stod(fz[7]) == 0.0);
}

TEST_CASE("usage problems exit 2, domain problems exit 1") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"analytic", "--p-up", "1.5"}).code == 2);
    CHECK(run_cli({"simulate", "--runs", "0"}).code == 2);
    CHECK(run_cli({"estimate"}).code == 2);
    CHECK(run_cli({"estimate", "--trace", kTrace, "--tau", "0"}).code == 2);
    const auto bad = run_cli({"analytic", "--delay", "-1"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("usage error:") != std::string::npos);

    const auto dead = run_cli({"analytic", "--p-up", "0", "--p-down", "0"});
    CHECK(dead.code == 1);
    CHECK(dead.err.find("error:") != std::string::npos);
    CHECK(run_cli({"estimate", "--trace", "/nonexistent/trace.csv"}).code == 1);

    const auto help = run_cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("analytic") != std::string::npos);
    CHECK(help.out.find("replay") != std::string::npos);
}

TEST_CASE("simulate is deterministic and tracks the exact value") {
    const std::vector<std::string> args = {"simulate", "--n",    "3",     "--p-up", "0.05",
                                           "--p-down", "0.5",    "--alpha", "1",    "--delay",
                                           "2",        "--runs", "20000", "--seed", "5"};
    const auto r = run_cli(args);
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "alpha,delay,n,p_up,p_down,kind,value,upper,runs,std_error");
    const auto f = split_fields(lines[1]);
    REQUIRE(f.size() == 10);
    CHECK(f[5] == "montecarlo");
    CHECK(f[7].empty());
    CHECK(f[8] == "20000");
    const double ratio = std::stod(f[6]);
    const double se = std::stod(f[9]);
    CHECK(se > 0.0);
    CHECK(std::abs(ratio - 191.0 / 1331.0) <= 3.0 * se);

    CHECK(run_cli(args).out == r.out);
}

TEST_CASE("single-point sweep reproduces the analytic row exactly") {
    const auto sweep = run_cli({"sweep", "--variable", "delay", "--values", "2"});
    const auto direct = run_cli({"analytic", "--delay", "2"});
    REQUIRE(sweep.code == 0);
    REQUIRE(direct.code == 0);
    CHECK(sweep.out == direct.out);
}

TEST_CASE("sweeps walk the requested variable") {
    const auto r = run_cli({"sweep", "--variable", "n", "--values", "5,10,20"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 4);
    double prev = -1.0;
    const std::vector<std::string> ns = {"5", "10", "20"};
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto f = split_fields(lines[k]);
        CHECK(f[2] == ns[k - 1]);
        const double v = std::stod(f[6]);
        CHECK(v > prev);
        prev = v;
    }

    const auto mixed = run_cli({"sweep", "--variable", "alpha", "--values", "0.5,1,2"});
    REQUIRE(mixed.code == 0);
    const auto ml = split_lines(mixed.out);
    REQUIRE(ml.size() == 4);
    CHECK(split_fields(ml[1])[5] == "exact");
    CHECK(split_fields(ml[2])[5] == "exact");
    CHECK(split_fields(ml[3])[5] == "bounds");

    // contact_time maps to p_down with the stationary fraction held fixed
    const auto ct = run_cli({"sweep", "--variable", "contact_time", "--values", "30"});
    REQUIRE(ct.code == 0);
    const auto cf = split_fields(split_lines(ct.out)[1]);
    CHECK(std::abs(std::stod(cf[4]) - 1.0 / 30.0) <= 1e-15);
    CHECK(std::abs(std::stod(cf[3]) - (1.0 / 30.0) * (1.0 / 10.0)) <= 1e-15);

    // degree maps to the stationary fraction with p_down held fixed
    const auto dg = run_cli({"sweep", "--variable", "degree", "--values", "1.9"});
    REQUIRE(dg.code == 0);
    const auto df = split_fields(split_lines(dg.out)[1]);
    CHECK(std::abs(std::stod(df[4]) - 0.5) <= 1e-15);
    CHECK(std::abs(std::stod(df[3]) - 0.5 * 0.1 / 0.9) <= 1e-12);
}

TEST_CASE("sweep errors name the offending value") {
    const auto r = run_cli({"sweep", "--variable", "contact_time", "--values", "30,0.5"});
    CHECK(r.code == 1);
    CHECK(r.err.find("contact_time") != std::string::npos);
    CHECK(r.err.find("0.5") != std::string::npos);

    const auto d = run_cli({"sweep", "--variable", "degree", "--values", "19.5"});
    CHECK(d.code == 1);
    CHECK(d.err.find("19.5") != std::string::npos);

    const auto f = run_cli({"sweep", "--variable", "n", "--values", "4.5"});
    CHECK(f.code == 1);
    CHECK(f.err.find("4.5") != std::string::npos);
}

TEST_CASE("sweep interleaves simulated rows on request") {
    const auto r = run_cli({"sweep", "--variable", "delay", "--values", "2,4", "--montecarlo",
                            "--runs", "4000", "--seed", "9", "--n", "5"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "alpha,delay,n,p_up,p_down,kind,value,upper,runs,std_error");
    for (std::size_t k = 1; k < lines.size(); ++k)
        REQUIRE(split_fields(lines[k]).size() == 10);
    const auto exact2 = split_fields(lines[1]);
    const auto mc2 = split_fields(lines[2]);
    CHECK(exact2[5] == "exact");
    CHECK(exact2[8].empty());
    CHECK(mc2[5] == "montecarlo");
    CHECK(mc2[8] == "4000");
    CHECK(std::abs(std::stod(mc2[6]) - std::stod(exact2[6])) <= 3.0 * std::stod(mc2[9]));
    CHECK(split_fields(lines[3])[5] == "exact");
    CHECK(split_fields(lines[4])[5] == "montecarlo");
}

TEST_CASE("estimate recovers the generating parameters from the bundled trace") {
    const auto r = run_cli({"estimate", "--trace", kTrace, "--tau", "15"});
    REQUIRE(r.code == 0);
    double p_up = 0.0, p_down = 0.0;
    bool censoring_note = false;
    std::string n_nodes;
    for (const auto& line : split_lines(r.out)) {
        const auto eq = line.find('=');
        REQUIRE(eq != std::string::npos);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "p_up") p_up = std::stod(value);
        if (key == "p_down") p_down = std::stod(value);
        if (key == "n_nodes") n_nodes = value;
        if (key == "censoring") censoring_note = true;
    }
    CHECK(n_nodes == "8");
    CHECK(std::abs(p_up - 0.1) <= 0.005);
    CHECK(std::abs(p_down - 0.4) <= 0.02);
    CHECK(censoring_note);

    const auto csv = run_cli({"estimate", "--trace", kTrace, "--tau", "15", "--format", "csv"});
    REQUIRE(csv.code == 0);
    const auto lines = split_lines(csv.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "n_nodes,tau,mean_link_lifetime,mean_degree,p_up,p_down");
    const auto f = split_fields(lines[1]);
    REQUIRE(f.size() == 6);
    CHECK(std::abs(std::stod(f[4]) - p_up) <= 1e-15);
    CHECK(std::abs(std::stod(f[5]) - p_down) <= 1e-15);

    // pretending two extra silent nodes dilutes the mean degree
    const auto wide = run_cli(
        {"estimate", "--trace", kTrace, "--tau", "15", "--format", "csv", "--n", "10"});
    REQUIRE(wide.code == 0);
    const auto wf = split_fields(split_lines(wide.out)[1]);
    CHECK(wf[0] == "10");
    CHECK(std::stod(wf[4]) < p_up);
}

TEST_CASE("replay floods the bundled trace") {
    const auto r = run_cli({"replay", "--trace", kTrace, "--tau", "15", "--alpha", "0.5,1,2",
                            "--delay", "60,120", "--horizon", "3000", "--injection-interval",
                            "300", "--pairs", "5", "--seed", "2"});
    REQUIRE(r.code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 7);
    CHECK(lines[0] == "alpha,delay_seconds,kind,delivery_ratio,n_samples");
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto f = split_fields(lines[k]);
        REQUIRE(f.size() == 5);
        CHECK(f[2] == "replay");
        const double ratio = std::stod(f[3]);
        CHECK(ratio >= 0.0);
        CHECK(ratio <= 1.0);
        CHECK(f[4] == "50");
    }

    const auto wa = run_cli({"replay", "--trace", kTrace, "--tau", "15", "--alpha", "0.5,1,2",
                             "--delay", "60,120", "--horizon", "3000", "--injection-interval",
                             "300", "--pairs", "5", "--seed", "2", "--with-analytic"});
    REQUIRE(wa.code == 0);
    const auto wl = split_lines(wa.out);
    // six replay rows, one exact row for each small-bundle cell, a bound
    // pair for each large-bundle cell
    REQUIRE(wl.size() == 15);
    int n_exact = 0, n_lower = 0, n_upper = 0;
    for (std::size_t k = 1; k < wl.size(); ++k) {
        const auto f = split_fields(wl[k]);
        if (f[2] == "exact") ++n_exact;
        if (f[2] == "lower") ++n_lower;
        if (f[2] == "upper") ++n_upper;
        if (f[2] != "replay") CHECK(f[4].empty());
    }
    CHECK(n_exact == 4);
    CHECK(n_lower == 2);
    CHECK(n_upper == 2);

    const auto bad = run_cli({"replay", "--trace", kTrace, "--tau", "15", "--alpha", "1",
                              "--delay", "100", "--horizon", "3000", "--injection-interval",
                              "300"});
    CHECK(bad.code == 1);  // delay is not a multiple of the sampling period
}

TEST_CASE("output redirects to a file") {
    const auto path = std::filesystem::temp_directory_path() / "epiflow_cli_out_test.csv";
    const auto r = run_cli({"analytic", "--delay", "2", "--out", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    CHECK(buffer.str() == run_cli({"analytic", "--delay", "2"}).out);
    std::filesystem::remove(path);
}

TEST_CASE("config files provide defaults that flags override") {
    const auto path = std::filesystem::temp_directory_path() / "epiflow_cli_test.conf";
    {
        std::ofstream conf(path);
        conf << "[analytic]\ndelay=2\nn=4\n";
    }
    const auto from_config = run_cli({"--config", path.string(), "analytic"});
    REQUIRE(from_config.code == 0);
    CHECK(from_config.out == run_cli({"analytic", "--delay", "2", "--n", "4"}).out);

    const auto overridden = run_cli({"--config", path.string(), "analytic", "--delay", "1"});
    REQUIRE(overridden.code == 0);
    CHECK(overridden.out == run_cli({"analytic", "--delay", "1", "--n", "4"}).out);
    std::filesystem::remove(path);
}
