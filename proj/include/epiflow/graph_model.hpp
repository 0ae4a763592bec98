#pragma once

#include <stdexcept>

// Per-edge two-state Markov model of a time-evolving contact graph: every
// potential link is an independent up/down chain with step probabilities
// p_up (down -> up) and p_down (up -> down), sampled every tau seconds.

namespace epiflow {

struct EdgeMarkovParams {
    double p_up;
    double p_down;
    double tau;

    // Probabilities must lie in (0, 1]: zero would make the expected
    // contact or inter-contact time infinite.
    EdgeMarkovParams(double p_up, double p_down, double tau = 1.0);
};

struct StationaryStats {
    double pi_up;     // stationary probability a link is up
    double pi_down;
    double e_t_up;    // expected contact time, seconds
    double e_t_down;  // expected inter-contact time, seconds
};

// Aggregate statistics measured from a discretized contact trace.
struct TraceStats {
    int n_nodes;
    double mean_link_lifetime;  // seconds
    double mean_degree;
    double tau;                 // sampling period, seconds
};

StationaryStats stationary_stats(const EdgeMarkovParams& params);

// (N-1) * pi_up
double mean_degree(const EdgeMarkovParams& params, int n_nodes);

// Inverts the closed forms: p_down = tau / lifetime, pi_up = degree/(N-1),
// p_up = p_down * pi_up / (1 - pi_up). Inconsistent statistics (degree 0,
// lifetime below tau, or derived probabilities leaving (0,1]) are errors,
// never clamped.
EdgeMarkovParams estimate_params(const TraceStats& stats);

} // namespace epiflow
