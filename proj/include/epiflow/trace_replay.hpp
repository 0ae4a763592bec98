#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "epiflow/dynamic_sim.hpp"
#include "epiflow/graph_model.hpp"

// Contact-trace ingestion and replay. The trace format is UTF-8 text, one
// record per line, `time_seconds,node_a,node_b` with non-negative decimal
// times; lines starting with '#' are comments. Two nodes seen in contact
// are assumed connected for the whole sampling period containing the
// record; nothing is extrapolated between samples.

namespace epiflow {

struct ContactRecord {
    double time = 0.0;
    std::string node_a;
    std::string node_b;
};

struct ParsedTrace {
    DynamicGraph graph;
    // names[k] is the identifier mapped to index k (first-appearance order).
    std::vector<std::string> node_names;
};

// Snapshot k holds edge {a, b} iff some record with those endpoints has
// time in [k*tau, (k+1)*tau). Malformed records raise an error carrying the
// line number.
ParsedTrace parse_trace(std::istream& input, double tau);

// Inverse of parse_trace for synthetic graphs: one record per up edge per
// snapshot, node identifiers as decimal indices.
void serialize_trace(const DynamicGraph& graph, std::ostream& output);

// Mean link lifetime is the mean length of maximal contiguous up-runs over
// all node pairs, scaled by tau; runs still open at the end of the trace
// count at their observed length. Mean degree averages 2|E_k|/N over
// snapshots.
TraceStats trace_stats(const DynamicGraph& graph);

struct ReplayConfig {
    double horizon = 0.0;             // seconds of trace used for injections
    double injection_interval = 0.0;  // seconds between batches, multiple of tau
    int pairs_per_batch = 1;
    std::vector<double> alpha_values;
    std::vector<double> delay_values;  // seconds, multiples of tau
    std::uint64_t seed = 1;
};

struct ReplayCell {
    double alpha = 0.0;
    double delay = 0.0;  // seconds
    long successes = 0;
    long samples = 0;

    double delivery_ratio() const {
        return samples > 0 ? static_cast<double>(successes) / static_cast<double>(samples) : 0.0;
    }
};

// Floods pairs_per_batch random ordered pairs from every batch start time
// for every (alpha, delay) combination; cells aggregate over all batches.
// Batches draw independent seed substreams and may run concurrently.
std::vector<ReplayCell> replay_experiment(const DynamicGraph& graph, const ReplayConfig& config);

} // namespace epiflow
