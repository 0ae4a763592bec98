#include "epiflow/dynamic_sim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "epiflow/epidemic_chain.hpp"

namespace epiflow {

namespace {

void check_unit_interval(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(name) + " must be in [0, 1], got " +
                                    std::to_string(p));
}

constexpr int kNotInfected = std::numeric_limits<int>::max();

// One synchronous infection round on a frozen edge list. New infections are
// collected first and applied at the end of the round, so the outcome does
// not depend on the order of the edge list. Returns true if anything changed.
bool infection_round(const std::vector<std::pair<int, int>>& edges, std::vector<int>& infected_at,
                     int mark_step, std::vector<int>& pending) {
    pending.clear();
    for (const auto& [a, b] : edges) {
        const bool a_in = infected_at[static_cast<std::size_t>(a)] != kNotInfected;
        const bool b_in = infected_at[static_cast<std::size_t>(b)] != kNotInfected;
        if (a_in != b_in)
            pending.push_back(a_in ? b : a);
    }
    for (int node : pending)
        infected_at[static_cast<std::size_t>(node)] = mark_step;
    return !pending.empty();
}

} // namespace

DynamicGraph sample_graph(double p_up, double p_down, double tau, int n_nodes, int steps,
                          Rng& rng, EdgeInit init) {
    check_unit_interval(p_up, "p_up");
    check_unit_interval(p_down, "p_down");
    if (!(tau > 0.0))
        throw std::invalid_argument("sample_graph: tau must be positive");
    if (n_nodes < 2)
        throw std::invalid_argument("sample_graph: need at least 2 nodes");
    if (steps < 1)
        throw std::invalid_argument("sample_graph: need at least 1 step");
    if (init == EdgeInit::stationary && p_up + p_down <= 0.0)
        throw std::invalid_argument("sample_graph: stationary init needs p_up + p_down > 0");

    DynamicGraph g;
    g.n_nodes = n_nodes;
    g.tau = tau;
    g.snapshots.resize(static_cast<std::size_t>(steps));

    const double pi_up = init == EdgeInit::stationary ? p_up / (p_up + p_down) : 0.0;
    for (int a = 0; a < n_nodes; ++a) {
        for (int b = a + 1; b < n_nodes; ++b) {
            bool up = false;
            switch (init) {
                case EdgeInit::stationary: up = uniform01(rng) < pi_up; break;
                case EdgeInit::all_down: up = false; break;
                case EdgeInit::all_up: up = true; break;
            }
            for (int k = 0; k < steps; ++k) {
                if (k > 0)
                    up = up ? uniform01(rng) >= p_down : uniform01(rng) < p_up;
                if (up)
                    g.snapshots[static_cast<std::size_t>(k)].emplace_back(a, b);
            }
        }
    }
    return g;
}

DynamicGraph sample_graph(const EdgeMarkovParams& params, int n_nodes, int steps,
                          std::uint64_t seed, EdgeInit init) {
    Rng rng(mix64(seed));
    return sample_graph(params.p_up, params.p_down, params.tau, n_nodes, steps, rng, init);
}

FloodOutcome flood(const DynamicGraph& graph, int source, int dest, double alpha, int max_delay,
                   int start_step) {
    const int n = graph.n_nodes;
    if (source == dest)
        throw std::invalid_argument("flood: source and destination coincide");
    if (source < 0 || source >= n || dest < 0 || dest >= n)
        throw std::invalid_argument("flood: node index out of range");
    if (!(alpha > 0.0))
        throw std::invalid_argument("flood: alpha must be positive");
    if (max_delay < 0 || start_step < 0 || start_step + max_delay > graph.steps())
        throw std::invalid_argument("flood: window [" + std::to_string(start_step) + ", " +
                                    std::to_string(start_step + max_delay) +
                                    ") exceeds the trace of " + std::to_string(graph.steps()) +
                                    " steps");

    std::vector<int> infected_at(static_cast<std::size_t>(n), kNotInfected);
    infected_at[static_cast<std::size_t>(source)] = 0;

    if (alpha <= 1.0) {
        const int hops = hops_per_step(alpha);
        std::vector<int> pending;
        for (int s = 1; s <= max_delay; ++s) {
            const auto& edges = graph.snapshots[static_cast<std::size_t>(start_step + s - 1)];
            // Round r reaches everything within r hops of the step-start
            // infected set on this frozen topology.
            for (int r = 0; r < hops; ++r) {
                if (!infection_round(edges, infected_at, s, pending))
                    break;
            }
            if (infected_at[static_cast<std::size_t>(dest)] <= s)
                return {true, s};
        }
        return {false, std::nullopt};
    }

    const int needed = steps_per_hop(alpha);
    std::vector<int> progress(static_cast<std::size_t>(n) * n, 0);
    std::vector<int> stamp(static_cast<std::size_t>(n) * n, -1);
    std::vector<std::pair<int, int>> active, touched, newly;
    for (int s = 1; s <= max_delay; ++s) {
        const auto& edges = graph.snapshots[static_cast<std::size_t>(start_step + s - 1)];
        touched.clear();
        newly.clear();
        for (const auto& [a, b] : edges) {
            for (const auto& [u, w] : {std::pair{a, b}, std::pair{b, a}}) {
                // Transmitter must have been infected before this step and
                // stay infected; the receiver must still be clean.
                if (infected_at[static_cast<std::size_t>(u)] >= s ||
                    infected_at[static_cast<std::size_t>(w)] != kNotInfected)
                    continue;
                const std::size_t idx = static_cast<std::size_t>(u) * n + w;
                stamp[idx] = s;
                touched.emplace_back(u, w);
                if (++progress[idx] >= needed)
                    newly.emplace_back(u, w);
            }
        }
        // Any transfer not re-observed this step lost its edge: reset.
        for (const auto& [u, w] : active) {
            const std::size_t idx = static_cast<std::size_t>(u) * n + w;
            if (stamp[idx] != s)
                progress[idx] = 0;
        }
        active.swap(touched);
        for (const auto& [u, w] : newly)
            infected_at[static_cast<std::size_t>(w)] = s;
        if (infected_at[static_cast<std::size_t>(dest)] <= s)
            return {true, s};
    }
    return {false, std::nullopt};
}

SimEstimate estimate_delivery(const EdgeMarkovParams& params, int n_nodes, const SimConfig& config) {
    if (config.runs < 1)
        throw std::invalid_argument("estimate_delivery: need at least 1 run");
    if (n_nodes < 2)
        throw std::invalid_argument("estimate_delivery: need at least 2 nodes");
    if (!(config.alpha > 0.0))
        throw std::invalid_argument("estimate_delivery: alpha must be positive");
    if (config.max_delay < 0)
        throw std::invalid_argument("estimate_delivery: negative delay");

    long successes = 0;
    if (config.max_delay > 0) {
#pragma omp parallel for schedule(static) reduction(+ : successes)
        for (long run = 0; run < config.runs; ++run) {
            Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(run)));
            const int source = uniform_below(rng, n_nodes);
            int dest = uniform_below(rng, n_nodes - 1);
            if (dest >= source)
                ++dest;
            const DynamicGraph g = sample_graph(params.p_up, params.p_down, params.tau, n_nodes,
                                                config.max_delay, rng);
            if (flood(g, source, dest, config.alpha, config.max_delay).success)
                ++successes;
        }
    }

    SimEstimate est;
    est.runs = config.runs;
    est.successes = successes;
    est.delivery_ratio = static_cast<double>(successes) / static_cast<double>(config.runs);
    est.std_error = std::sqrt(est.delivery_ratio * (1.0 - est.delivery_ratio) /
                              static_cast<double>(config.runs));
    return est;
}

} // namespace epiflow
