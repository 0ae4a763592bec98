// Times the OpenMP kernels against their single-threaded twins and checks
// the outputs still match bit for bit. Not part of the test suite; run it
// by hand when touching the kernels.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "epiflow/dynamic_sim.hpp"
#include "epiflow/epidemic_chain.hpp"
#include "epiflow/reference.hpp"

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
    const auto dt = std::chrono::steady_clock::now() - start;
    return std::chrono::duration<double, std::milli>(dt).count();
}

template <typename F>
double time_best_of(int reps, F&& body) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        best = std::min(best, ms_since(t0));
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                identical ? "outputs identical" : "OUTPUTS DIFFER");
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif

    using namespace epiflow;

    for (int n : {40, 80, 120}) {
        TransitionMatrix serial_m = reference::build_transition_matrix(n, 0.3, 0.05);
        TransitionMatrix parallel_m = build_transition_matrix(n, 0.3, 0.05);
        const bool same = serial_m.entries() == parallel_m.entries();
        const double ts = time_best_of(3, [&] { reference::build_transition_matrix(n, 0.3, 0.05); });
        const double tp = time_best_of(3, [&] { build_transition_matrix(n, 0.3, 0.05); });
        char label[64];
        std::snprintf(label, sizeof label, "build matrix N=%d", n);
        report(label, ts, tp, same);
    }

    {
        const int n = 60;
        const TransitionMatrix m = build_transition_matrix(n, 0.3, 0.05);
        std::vector<double> dist(static_cast<std::size_t>(m.dim()), 0.0);
        dist[0] = 1.0;
        const int steps = 50;
        const auto serial_out = reference::evolve(dist, m, steps);
        const auto parallel_out = evolve(dist, m, steps);
        const double ts = time_best_of(3, [&] { reference::evolve(dist, m, steps); });
        const double tp = time_best_of(3, [&] { evolve(dist, m, steps); });
        report("evolve N=60 x50", ts, tp, serial_out == parallel_out);
    }

    {
        const EdgeMarkovParams params(0.05, 0.5);
        SimConfig config;
        config.runs = 20000;
        config.seed = 42;
        config.alpha = 1.0;
        config.max_delay = 10;
        const auto serial_est = reference::estimate_delivery(params, 20, config);
        const auto parallel_est = estimate_delivery(params, 20, config);
        const double ts = time_best_of(3, [&] { reference::estimate_delivery(params, 20, config); });
        const double tp = time_best_of(3, [&] { estimate_delivery(params, 20, config); });
        report("monte carlo 2e4 runs", ts, tp, serial_est.successes == parallel_est.successes);
    }

    return 0;
}
