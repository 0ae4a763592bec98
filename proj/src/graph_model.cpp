#include "epiflow/graph_model.hpp"

#include <cmath>
#include <string>

namespace epiflow {

namespace {

void check_probability(double p, const char* name) {
    if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(name) + " must be in (0, 1], got " +
                                    std::to_string(p));
}

} // namespace

EdgeMarkovParams::EdgeMarkovParams(double p_up_, double p_down_, double tau_)
    : p_up(p_up_), p_down(p_down_), tau(tau_) {
    check_probability(p_up, "p_up");
    check_probability(p_down, "p_down");
    if (!(tau > 0.0))
        throw std::invalid_argument("tau must be positive, got " + std::to_string(tau));
}

StationaryStats stationary_stats(const EdgeMarkovParams& params) {
    StationaryStats s;
    s.pi_up = params.p_up / (params.p_up + params.p_down);
    s.pi_down = params.p_down / (params.p_up + params.p_down);
    s.e_t_up = params.tau / params.p_down;
    s.e_t_down = params.tau / params.p_up;
    return s;
}

double mean_degree(const EdgeMarkovParams& params, int n_nodes) {
    if (n_nodes < 2)
        throw std::invalid_argument("mean_degree requires at least 2 nodes");
    return (n_nodes - 1) * stationary_stats(params).pi_up;
}

EdgeMarkovParams estimate_params(const TraceStats& stats) {
    if (stats.n_nodes < 2)
        throw std::invalid_argument("estimate_params requires at least 2 nodes");
    if (!(stats.tau > 0.0))
        throw std::invalid_argument("estimate_params: tau must be positive");
    if (stats.mean_degree <= 0.0)
        throw std::invalid_argument("estimate_params: mean degree is zero, p_up undefined");
    if (stats.mean_link_lifetime < stats.tau)
        throw std::invalid_argument(
            "estimate_params: mean link lifetime " + std::to_string(stats.mean_link_lifetime) +
            " s is below the sampling period " + std::to_string(stats.tau) + " s");

    const double p_down = stats.tau / stats.mean_link_lifetime;
    const double pi_up = stats.mean_degree / (stats.n_nodes - 1);
    if (pi_up >= 1.0)
        throw std::invalid_argument("estimate_params: mean degree " +
                                    std::to_string(stats.mean_degree) +
                                    " implies a saturated topology (pi_up >= 1)");
    const double p_up = p_down * pi_up / (1.0 - pi_up);
    if (p_up > 1.0)
        throw std::invalid_argument("estimate_params: derived p_up " + std::to_string(p_up) +
                                    " exceeds 1; trace statistics are inconsistent");
    return EdgeMarkovParams(p_up, p_down, stats.tau);
}

} // namespace epiflow
