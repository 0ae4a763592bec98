#pragma once

#include <vector>

#include "epiflow/dynamic_sim.hpp"
#include "epiflow/epidemic_chain.hpp"

// Single-threaded twins of the OpenMP kernels. Kept for testing (the
// parallel versions must reproduce these bit for bit) and as the baseline
// for the benchmark tool.

namespace epiflow::reference {

TransitionMatrix build_transition_matrix(int n_nodes, double p_just, double p_earlier);

std::vector<double> evolve(std::vector<double> dist, const TransitionMatrix& matrix, int steps);

SimEstimate estimate_delivery(const EdgeMarkovParams& params, int n_nodes, const SimConfig& config);

} // namespace epiflow::reference
