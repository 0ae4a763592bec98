#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "epiflow/graph_model.hpp"

// Absorbing Markov chain for epidemic flooding of a single bundle between a
// source/destination pair on an edge-Markovian graph of N nodes. A chain
// state is either Init (only the source holds the bundle), Succ (the
// destination received it, absorbing), or a pair (i, j): i nodes infected
// two or more steps ago, j nodes infected on the previous step. The
// distinction matters because a just-infected node's links to clean nodes
// are still in the stationary state (up with probability pi_up next step),
// while an earlier-infected node's links to clean nodes are known to be
// down (up with probability p_up next step).

namespace epiflow {

enum class StateKind : std::uint8_t { init, pair, succ };

struct EpidemicState {
    StateKind kind;
    int infected_earlier = 0;  // i, only for pair states
    int infected_just = 0;     // j, only for pair states

    friend bool operator==(const EpidemicState&, const EpidemicState&) = default;
};

// 2 + N(N-1)/2
int state_count(int n_nodes);

// Canonical ordering: Init first, then pair states sorted lexicographically
// by (i, j), Succ last. Stable across runs.
std::vector<EpidemicState> enumerate_states(int n_nodes);

// Binomial pmf, multiplicative recurrence (no factorials). Returns 0 when
// m < 0 or m > n.
double binomial_pdf(int m, double p, int n);

// Probability that exactly m of the w clean nodes get infected when each of
// u infectious nodes reaches each clean node independently with probability p.
double p_inf(int m, double p, int u, int w);

// Probability the destination is infected during the next step given i
// earlier-infected and j just-infected nodes, with the per-class effective
// link-up probabilities expressed as (pi_down_eff = 1 - p_just, p_up_eff).
double p_succ(int i, int j, double pi_down_eff, double p_up_eff);

// Dense row-stochastic transition matrix over the canonical state ordering.
// Construction validates row sums (1e-9), non-negativity, the absorbing
// Succ row, the never-re-entered Init column, and that pair transitions
// only reach (i+j, j').
class TransitionMatrix {
public:
    TransitionMatrix(int n_nodes, std::vector<double> entries);

    int n_nodes() const { return n_nodes_; }
    int dim() const { return dim_; }
    const std::vector<EpidemicState>& states() const { return states_; }
    const std::vector<double>& entries() const { return entries_; }

    double operator()(int row, int col) const { return entries_[static_cast<std::size_t>(row) * dim_ + col]; }
    std::span<const double> row(int r) const {
        return {entries_.data() + static_cast<std::size_t>(r) * dim_, static_cast<std::size_t>(dim_)};
    }

    int init_index() const { return 0; }
    int succ_index() const { return dim_ - 1; }
    int pair_index(int i, int j) const;

private:
    int n_nodes_;
    int dim_;
    std::vector<EpidemicState> states_;
    std::vector<double> entries_;
};

// Writes the transition row out of state (i, j) into `row`, given the
// effective up probabilities for the two infectious classes: p_just for
// just-infected links (stationary) and p_earlier for earlier-infected
// links (known down). The Init row is the (0, 1) row.
namespace detail {
void fill_transition_row(int n_nodes, double p_just, double p_earlier, int i, int j,
                         std::span<double> row);
}

// Shared kernel behind all four matrices; rows are built concurrently.
TransitionMatrix build_transition_matrix(int n_nodes, double p_just, double p_earlier);

// One-step dynamic matrix: (p_just, p_earlier) = (pi_up, p_up).
TransitionMatrix build_dynamic_matrix(const EdgeMarkovParams& params, int n_nodes);

// Within-step propagation on a frozen topology: no new link can come up,
// so earlier-infected nodes contribute nothing, (p_just, p_earlier) = (pi_up, 0).
TransitionMatrix build_static_matrix(const EdgeMarkovParams& params, int n_nodes);

// For bundles needing ceil(alpha) consecutive steps per hop, the published
// lower-bound substitution for the earlier-infected class reads
// p_up * p_down^(c-1); a link that must come up and then stay up for the
// rest of the interval gives p_up * (1-p_down)^(c-1). Both are valid lower
// bounds; `corrected` is the default, `verbatim` keeps the published form.
enum class LowerBoundMode { corrected, verbatim };

struct EffectiveParams {
    double p_just;     // effective up probability, just-infected links
    double p_earlier;  // effective up probability, earlier-infected links
};

EffectiveParams effective_params_lower(const EdgeMarkovParams& params, double alpha,
                                       LowerBoundMode mode = LowerBoundMode::corrected);
EffectiveParams effective_params_upper(const EdgeMarkovParams& params, double alpha);

struct DeliveryQuery {
    int n_nodes;
    double alpha;    // bundle size in units of link size
    int max_delay;   // d, in time steps
};

enum class DeliveryKind { exact, bounded };

struct DeliveryResult {
    DeliveryKind kind;
    double value = 0.0;   // exact results
    double lower = 0.0;   // bounded results
    double upper = 0.0;
    // Set when alpha > 1 and max_delay < ceil(alpha): no whole transfer
    // interval fits, the bounds degenerate to (0, 0).
    bool zero_intervals = false;
};

// Distribution after `steps` left-multiplications by the matrix. The input
// must match the matrix dimension and sum to 1 within 1e-9.
std::vector<double> evolve(std::vector<double> dist, const TransitionMatrix& matrix, int steps);

// Delivery ratio after query.max_delay steps.
//   alpha == 1: exact, d applications of the dynamic matrix.
//   alpha <  1: exact, each step applies the dynamic matrix once then the
//               static matrix floor(1/alpha)-1 times.
//   alpha >  1: lower/upper bounds over floor(d / ceil(alpha)) intervals.
// Evaluation is by repeated vector-matrix products from the Init row.
DeliveryResult delivery_ratio(const EdgeMarkovParams& params, const DeliveryQuery& query,
                              LowerBoundMode mode = LowerBoundMode::corrected);

// floor(1/alpha) with a tolerance for slightly-off reciprocals.
int hops_per_step(double alpha);
// ceil(alpha), same tolerance.
int steps_per_hop(double alpha);

} // namespace epiflow
