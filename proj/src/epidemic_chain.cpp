#include "epiflow/epidemic_chain.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace epiflow {

namespace {

constexpr double kRowSumTol = 1e-9;

void check_node_count(int n_nodes) {
    if (n_nodes < 2)
        throw std::invalid_argument("state space requires at least 2 nodes, got " +
                                    std::to_string(n_nodes));
}

void check_unit_interval(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(name) + " must be in [0, 1], got " +
                                    std::to_string(p));
}

// The multiplicative recurrence needs its anchor (1-p)^n to survive in
// double precision; below this the whole vector would flush to zero even
// though the upper tail carries all the mass (large n, p near 1).
constexpr double kAnchorFloor = 1e-250;

double log_binomial_pdf(int m, double p, int n) {
    return std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0) +
           m * std::log(p) + (n - m) * std::log1p(-p);
}

// pmf vector for Binomial(n, p), index 0..n.
std::vector<double> binomial_pdf_vector(double p, int n) {
    std::vector<double> pdf(static_cast<std::size_t>(n) + 1, 0.0);
    if (p <= 0.0) {
        pdf[0] = 1.0;
        return pdf;
    }
    if (p >= 1.0) {
        pdf[static_cast<std::size_t>(n)] = 1.0;
        return pdf;
    }
    pdf[0] = std::pow(1.0 - p, n);
    if (pdf[0] < kAnchorFloor) {
        for (int m = 0; m <= n; ++m)
            pdf[static_cast<std::size_t>(m)] = std::exp(log_binomial_pdf(m, p, n));
        return pdf;
    }
    const double ratio = p / (1.0 - p);
    for (int m = 0; m < n; ++m)
        pdf[static_cast<std::size_t>(m) + 1] = pdf[static_cast<std::size_t>(m)] *
                                               (static_cast<double>(n - m) / (m + 1)) * ratio;
    return pdf;
}

} // namespace

int state_count(int n_nodes) {
    check_node_count(n_nodes);
    return 2 + n_nodes * (n_nodes - 1) / 2;
}

std::vector<EpidemicState> enumerate_states(int n_nodes) {
    check_node_count(n_nodes);
    std::vector<EpidemicState> states;
    states.reserve(static_cast<std::size_t>(state_count(n_nodes)));
    states.push_back({StateKind::init});
    for (int i = 1; i <= n_nodes - 1; ++i)
        for (int j = 0; j <= n_nodes - 1 - i; ++j)
            states.push_back({StateKind::pair, i, j});
    states.push_back({StateKind::succ});
    return states;
}

double binomial_pdf(int m, double p, int n) {
    if (n < 0)
        throw std::invalid_argument("binomial_pdf: negative trial count");
    check_unit_interval(p, "binomial_pdf p");
    if (m < 0 || m > n)
        return 0.0;
    if (p <= 0.0)
        return m == 0 ? 1.0 : 0.0;
    if (p >= 1.0)
        return m == n ? 1.0 : 0.0;
    double v = std::pow(1.0 - p, n);
    if (v < kAnchorFloor)
        return std::exp(log_binomial_pdf(m, p, n));
    const double ratio = p / (1.0 - p);
    for (int k = 0; k < m; ++k)
        v *= (static_cast<double>(n - k) / (k + 1)) * ratio;
    return v;
}

double p_inf(int m, double p, int u, int w) {
    if (m < 0 || m > w)
        throw std::invalid_argument("p_inf: m must satisfy 0 <= m <= w");
    if (u < 0 || w < 0)
        throw std::invalid_argument("p_inf: negative set size");
    check_unit_interval(p, "p_inf p");
    return binomial_pdf(m, 1.0 - std::pow(1.0 - p, u), w);
}

double p_succ(int i, int j, double pi_down_eff, double p_up_eff) {
    if (i < 0 || j < 0)
        throw std::invalid_argument("p_succ: negative class size");
    return 1.0 - std::pow(pi_down_eff, j) * std::pow(1.0 - p_up_eff, i);
}

int TransitionMatrix::pair_index(int i, int j) const {
    if (i < 1 || i > n_nodes_ - 1 || j < 0 || j > n_nodes_ - 1 - i)
        throw std::invalid_argument("pair_index: (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ") out of range for N = " +
                                    std::to_string(n_nodes_));
    return 1 + (i - 1) * n_nodes_ - i * (i - 1) / 2 + j;
}

TransitionMatrix::TransitionMatrix(int n_nodes, std::vector<double> entries)
    : n_nodes_(n_nodes),
      dim_(state_count(n_nodes)),
      states_(enumerate_states(n_nodes)),
      entries_(std::move(entries)) {
    if (entries_.size() != static_cast<std::size_t>(dim_) * dim_)
        throw std::invalid_argument("transition matrix: entry count does not match dimension");

    for (int r = 0; r < dim_; ++r) {
        double sum = 0.0;
        for (int c = 0; c < dim_; ++c) {
            const double v = (*this)(r, c);
            if (!(v >= 0.0))
                throw std::invalid_argument("transition matrix: negative entry at row " +
                                            std::to_string(r));
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw std::invalid_argument("transition matrix: row " + std::to_string(r) +
                                        " sums to " + std::to_string(sum));
    }
    // Succ absorbing, Init never re-entered.
    for (int c = 0; c < dim_; ++c) {
        if ((*this)(succ_index(), c) != (c == succ_index() ? 1.0 : 0.0))
            throw std::invalid_argument("transition matrix: Succ row is not absorbing");
        if ((*this)(c, init_index()) != 0.0)
            throw std::invalid_argument("transition matrix: Init column must be zero");
    }
    // A pair row may only reach Succ or (i+j, j').
    for (int r = 0; r < dim_ - 1; ++r) {
        const EpidemicState& from = states_[static_cast<std::size_t>(r)];
        const int next_i = from.kind == StateKind::init ? 1
                                                        : from.infected_earlier + from.infected_just;
        for (int c = 1; c < dim_ - 1; ++c) {
            if ((*this)(r, c) == 0.0)
                continue;
            if (states_[static_cast<std::size_t>(c)].infected_earlier != next_i)
                throw std::invalid_argument("transition matrix: row " + std::to_string(r) +
                                            " reaches a state with i' != i + j");
        }
    }
}

namespace detail {

void fill_transition_row(int n_nodes, double p_just, double p_earlier, int i, int j,
                         std::span<double> row) {
    const int w = n_nodes - 1 - i - j;  // clean nodes other than the destination
    const int dim = state_count(n_nodes);
    for (auto& v : row)
        v = 0.0;

    const double succ = p_succ(i, j, 1.0 - p_just, p_earlier);
    row[static_cast<std::size_t>(dim) - 1] = succ;

    // Index of (i+j, 0); valid because i+j <= n-1 and Init maps to (0, 1).
    const int next_i = i + j == 0 ? 1 : i + j;
    const int base = 1 + (next_i - 1) * n_nodes - next_i * (next_i - 1) / 2;

    // Just-infected nodes reach each of the w clean nodes with p_just; the
    // m nodes they infect are removed from the pool the earlier-infected
    // nodes draw from.
    const double reach_just = 1.0 - std::pow(1.0 - p_just, j);
    const double reach_earlier = 1.0 - std::pow(1.0 - p_earlier, i);
    const std::vector<double> pdf_just = binomial_pdf_vector(reach_just, w);
    for (int m = 0; m <= w; ++m) {
        const std::vector<double> pdf_earlier = binomial_pdf_vector(reach_earlier, w - m);
        for (int k = 0; k <= w - m; ++k)
            row[static_cast<std::size_t>(base) + m + k] += (1.0 - succ) * pdf_just[static_cast<std::size_t>(m)] *
                                                           pdf_earlier[static_cast<std::size_t>(k)];
    }
}

} // namespace detail

TransitionMatrix build_transition_matrix(int n_nodes, double p_just, double p_earlier) {
    check_node_count(n_nodes);
    check_unit_interval(p_just, "p_just");
    check_unit_interval(p_earlier, "p_earlier");

    const int dim = state_count(n_nodes);
    const auto states = enumerate_states(n_nodes);
    std::vector<double> entries(static_cast<std::size_t>(dim) * dim, 0.0);

#pragma omp parallel for schedule(static)
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

TransitionMatrix build_dynamic_matrix(const EdgeMarkovParams& params, int n_nodes) {
    const auto st = stationary_stats(params);
    return build_transition_matrix(n_nodes, st.pi_up, params.p_up);
}

TransitionMatrix build_static_matrix(const EdgeMarkovParams& params, int n_nodes) {
    const auto st = stationary_stats(params);
    return build_transition_matrix(n_nodes, st.pi_up, 0.0);
}

EffectiveParams effective_params_lower(const EdgeMarkovParams& params, double alpha,
                                       LowerBoundMode mode) {
    if (!(alpha > 1.0))
        throw std::invalid_argument("effective_params_lower requires alpha > 1");
    const int c = steps_per_hop(alpha);
    const auto st = stationary_stats(params);
    const double stays_up = std::pow(1.0 - params.p_down, c - 1);
    EffectiveParams eff;
    eff.p_just = st.pi_up * stays_up;
    eff.p_earlier = mode == LowerBoundMode::corrected
                        ? params.p_up * stays_up
                        : params.p_up * std::pow(params.p_down, c - 1);
    return eff;
}

EffectiveParams effective_params_upper(const EdgeMarkovParams& params, double alpha) {
    if (!(alpha > 1.0))
        throw std::invalid_argument("effective_params_upper requires alpha > 1");
    const int c = steps_per_hop(alpha);
    const auto st = stationary_stats(params);
    const double stays_up = std::pow(1.0 - params.p_down, c - 1);
    EffectiveParams eff;
    eff.p_just = (st.pi_up + st.pi_down * (1.0 - std::pow(1.0 - params.p_up, c - 1))) * stays_up;
    eff.p_earlier = (1.0 - std::pow(1.0 - params.p_up, c)) * stays_up;
    return eff;
}

int hops_per_step(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("hops_per_step requires 0 < alpha <= 1");
    return static_cast<int>(std::floor(1.0 / alpha + 1e-12));
}

int steps_per_hop(double alpha) {
    if (!(alpha > 1.0))
        throw std::invalid_argument("steps_per_hop requires alpha > 1");
    return static_cast<int>(std::ceil(alpha - 1e-12));
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
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw std::invalid_argument("evolve: distribution sums to " + std::to_string(sum));

    const double* m = matrix.entries().data();
    std::vector<double> next(static_cast<std::size_t>(dim));
    for (int s = 0; s < steps; ++s) {
        // Each output entry is one fixed-order dot product, so the result
        // does not depend on the thread count.
#pragma omp parallel for schedule(static) if (dim >= 128)
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

DeliveryResult delivery_ratio(const EdgeMarkovParams& params, const DeliveryQuery& query,
                              LowerBoundMode mode) {
    check_node_count(query.n_nodes);
    if (!(query.alpha > 0.0))
        throw std::invalid_argument("delivery_ratio requires alpha > 0");
    if (query.max_delay < 0)
        throw std::invalid_argument("delivery_ratio requires a non-negative delay");

    const int dim = state_count(query.n_nodes);
    std::vector<double> dist(static_cast<std::size_t>(dim), 0.0);
    dist[0] = 1.0;
    const int succ = dim - 1;

    if (query.alpha <= 1.0) {
        const TransitionMatrix dynamic = build_dynamic_matrix(params, query.n_nodes);
        const int hops = hops_per_step(query.alpha);
        if (hops == 1) {
            dist = evolve(std::move(dist), dynamic, query.max_delay);
        } else {
            const TransitionMatrix frozen = build_static_matrix(params, query.n_nodes);
            for (int s = 0; s < query.max_delay; ++s) {
                dist = evolve(std::move(dist), dynamic, 1);
                dist = evolve(std::move(dist), frozen, hops - 1);
            }
        }
        return {DeliveryKind::exact, dist[static_cast<std::size_t>(succ)], 0.0, 0.0, false};
    }

    const int c = steps_per_hop(query.alpha);
    const int intervals = query.max_delay / c;
    if (intervals == 0)
        return {DeliveryKind::bounded, 0.0, 0.0, 0.0, true};

    const auto lo = effective_params_lower(params, query.alpha, mode);
    const auto hi = effective_params_upper(params, query.alpha);
    const TransitionMatrix lower_m = build_transition_matrix(query.n_nodes, lo.p_just, lo.p_earlier);
    const TransitionMatrix upper_m = build_transition_matrix(query.n_nodes, hi.p_just, hi.p_earlier);

    DeliveryResult result{DeliveryKind::bounded, 0.0, 0.0, 0.0, false};
    result.lower = evolve(dist, lower_m, intervals)[static_cast<std::size_t>(succ)];
    result.upper = evolve(dist, upper_m, intervals)[static_cast<std::size_t>(succ)];
    return result;
}

} // namespace epiflow
