#include "epiflow/reference.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "epiflow/rng.hpp"

namespace epiflow::reference {

TransitionMatrix build_transition_matrix(int n_nodes, double p_just, double p_earlier) {
    const int dim = state_count(n_nodes);
    const auto states = enumerate_states(n_nodes);
    std::vector<double> entries(static_cast<std::size_t>(dim) * dim, 0.0);

    for (int r = 0; r < dim - 1; ++r) {
        const EpidemicState& s = states[static_cast<std::size_t>(r)];
        const int i = s.kind == StateKind::init ? 0 : s.infected_earlier;
        const int j = s.kind == StateKind::init ? 1 : s.infected_just;
        detail::fill_transition_row(n_nodes, p_just, p_earlier, i, j,
                                    {entries.data() + static_cast<std::size_t>(r) * dim,
                                     static_cast<std::size_t>(dim)});
    }
    entries[static_cast<std::size_t>(dim) * dim - 1] = 1.0;

    return TransitionMatrix(n_nodes, std::move(entries));
}

std::vector<double> evolve(std::vector<double> dist, const TransitionMatrix& matrix, int steps) {
    const int dim = matrix.dim();
    if (dist.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("evolve: distribution length " + std::to_string(dist.size()) +
                                    " does not match matrix dimension " + std::to_string(dim));
    if (steps < 0)
        throw std::invalid_argument("evolve: negative step count");
    double sum = 0.0;
    for (double v : dist)
        sum += v;
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("evolve: distribution sums to " + std::to_string(sum));

    const double* m = matrix.entries().data();
    std::vector<double> next(static_cast<std::size_t>(dim));
    for (int s = 0; s < steps; ++s) {
        for (int c = 0; c < dim; ++c) {
            double acc = 0.0;
            for (int r = 0; r < dim; ++r)
                acc += dist[static_cast<std::size_t>(r)] * m[static_cast<std::size_t>(r) * dim + c];
            next[static_cast<std::size_t>(c)] = acc;
        }
        dist.swap(next);
    }
    return dist;
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

} // namespace epiflow::reference
