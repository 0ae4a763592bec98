#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "epiflow/graph_model.hpp"
#include "epiflow/rng.hpp"

// Monte Carlo side of the model: sample the edge chains explicitly, flood a
// bundle over the sampled snapshots, and estimate delivery ratios with
// binomial confidence data. Every entry point is deterministic given its
// seed; runs use independent substreams so trial order never matters.

namespace epiflow {

struct DynamicGraph {
    int n_nodes = 0;
    double tau = 1.0;
    // One sorted edge list (a < b) per time step.
    std::vector<std::vector<std::pair<int, int>>> snapshots;

    int steps() const { return static_cast<int>(snapshots.size()); }

    friend bool operator==(const DynamicGraph&, const DynamicGraph&) = default;
};

enum class EdgeInit {
    stationary,  // initial state drawn from (pi_down, pi_up)
    all_down,    // covers degenerate limits such as p_up = 0
    all_up,
};

// Each of the N(N-1)/2 edges evolves as an independent two-state chain.
// The raw-probability overload accepts the closed endpoints ([0,1]) that
// EdgeMarkovParams rejects, for degenerate-limit experiments.
DynamicGraph sample_graph(double p_up, double p_down, double tau, int n_nodes, int steps,
                          Rng& rng, EdgeInit init = EdgeInit::stationary);
DynamicGraph sample_graph(const EdgeMarkovParams& params, int n_nodes, int steps,
                          std::uint64_t seed, EdgeInit init = EdgeInit::stationary);

struct FloodOutcome {
    bool success = false;
    // 1-based step (counted from start_step) at which the destination was
    // infected, when success.
    std::optional<int> delivery_step;
};

// Epidemic flooding of one bundle from source toward dest over snapshots
// [start_step, start_step + max_delay).
//   alpha == 1: one synchronous infection round per step.
//   alpha <  1: floor(1/alpha) synchronous rounds on that step's frozen
//               topology; infections propagate within the step.
//   alpha >  1: a hop completes once its edge has stayed up for
//               ceil(alpha) consecutive steps with the transmitter infected
//               throughout; progress resets when the edge drops. Nodes
//               transmit on all their edges independently, full bundles
//               only (no partial-transfer resumption).
FloodOutcome flood(const DynamicGraph& graph, int source, int dest, double alpha, int max_delay,
                   int start_step = 0);

struct SimConfig {
    long runs = 1;
    std::uint64_t seed = 1;
    double alpha = 1.0;
    int max_delay = 1;
};

struct SimEstimate {
    double delivery_ratio = 0.0;
    double std_error = 0.0;
    long runs = 0;
    long successes = 0;
};

// Independent trials, each with a fresh sampled graph and a uniformly
// random ordered source/destination pair.
SimEstimate estimate_delivery(const EdgeMarkovParams& params, int n_nodes, const SimConfig& config);

} // namespace epiflow
