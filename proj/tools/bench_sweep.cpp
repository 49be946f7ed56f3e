// bench_sweep — times the control-duration sweep kernel, serial reference vs
// the OpenMP worker pool, and checks the two produce identical results.

#include "qontrol/metrics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

using namespace qontrol;
using clock_type = std::chrono::steady_clock;

int main(int argc, char** argv) {
    SimConfig cfg;
    cfg.dt_in_hbar_over_H12 = argc > 1 ? std::atof(argv[1]) : 1e-5;

    std::vector<double> deltas;
    for (int i = 0; i <= 20; ++i) {
        deltas.push_back(0.05 * i);
    }
    const std::vector<double> thresholds{0.95, 0.90, 0.80, 0.70};

    const auto t0 = clock_type::now();
    const auto serial = duration_sweep_serial(deltas, thresholds, cfg);
    const auto t1 = clock_type::now();
    const auto parallel = duration_sweep(deltas, thresholds, cfg);
    const auto t2 = clock_type::now();

    bool identical = serial.size() == parallel.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i) {
        identical = serial[i].fraction == parallel[i].fraction &&
                    serial[i].delta_e_over_E == parallel[i].delta_e_over_E &&
                    serial[i].threshold == parallel[i].threshold;
    }

    const double serial_s = std::chrono::duration<double>(t1 - t0).count();
    const double parallel_s = std::chrono::duration<double>(t2 - t1).count();
    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("points: %zu (dt = %g hbar/H12)\n", serial.size(),
                cfg.dt_in_hbar_over_H12);
    std::printf("serial:   %.3f s\n", serial_s);
    std::printf("parallel: %.3f s  (%d threads, speedup %.2fx)\n", parallel_s, threads,
                serial_s / parallel_s);
    std::printf("results identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
