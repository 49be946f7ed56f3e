// acceptance — end-to-end criteria suite. Runs every criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion; exits nonzero if any
// fail.

#include "qontrol/analytic.hpp"
#include "qontrol/dynamics.hpp"
#include "qontrol/io.hpp"
#include "qontrol/metrics.hpp"
#include "qontrol/series.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace qontrol;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
    std::printf("%-4s %s  %s\n", id.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
    if (!ok) {
        ++failures;
    }
}

double max_defect(const Trajectory& traj) {
    return *std::max_element(traj.unitarity_defect.begin(), traj.unitarity_defect.end());
}

Trajectory run(double delta, double t_end, EquationForm form = EquationForm::first_order,
               DivergencePolicy policy = {}, double dt = 1e-5) {
    const SystemParams p = make_params(1.0, delta);
    return integrate(p, make_grid(p, t_end, dt), IntegrationMethod::rk4, form, policy);
}

std::string fmt(double v) { return io::format_double(v); }

// A1: degenerate rk4 run over one period reproduces the closed form pointwise
// and reaches complete transfer at the quarter period, within 5 s.
void a1() {
    const auto t0 = clock_type::now();
    const Trajectory traj = run(0.0, 1.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double ref = degenerate_probability_transfer(traj.params, traj.times[k]);
        worst = std::max(worst, std::abs(traj.p2_at(k) - ref));
    }
    const double quarter_dev = std::abs(traj.p2_at(39270) - 1.0);
    const double seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    const bool ok = worst <= 1e-8 && quarter_dev <= 1e-8 && seconds <= 5.0;
    report("A1", ok,
           "max|p2-closed_form|=" + fmt(worst) + " |p2(T/4)-1|=" + fmt(quarter_dev) +
               " runtime=" + fmt(seconds) + "s");
}

// A2: unitarity defect bounds over one period, degenerate and near-degenerate.
// A3: quarter-period transfer deviation <= 1.2e-4 across the same splittings.
void a2_a3() {
    const Trajectory degenerate = run(0.0, 1.0);
    const double defect0 = max_defect(degenerate);
    bool ok2 = defect0 <= 1e-9;
    bool ok3 = true;
    std::string detail2 = "defect(0)=" + fmt(defect0);
    std::string detail3;
    for (double delta : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
        const Trajectory traj = run(delta, 1.0);
        const double defect = max_defect(traj);
        const double dev = std::abs(traj.p2_at(39270) - 1.0);
        ok2 = ok2 && defect <= 1e-8;
        ok3 = ok3 && dev <= 1.2e-4;
        detail3 += fmt(dev) + " ";
    }
    report("A2", ok2, detail2 + " max defect over splittings <= 1e-8");
    report("A3", ok3, "|p2(T/4)-1| = " + detail3 + "(bound 1.2e-4)");
}

// A4: control duration at 0.20E / 95% equals 0.34 within the figure-read
// tolerance 0.05, each point within 5 s.
double a4() {
    const auto t0 = clock_type::now();
    const double frac = control_duration(run(0.20, 0.25), 0.95).fraction;
    const double seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    const bool ok = std::abs(frac - 0.34) <= 0.05 && seconds <= 5.0;
    report("A4", ok, "fraction(0.20E,0.95)=" + fmt(frac) + " runtime=" + fmt(seconds) + "s");
    return frac;
}

// A5: exact zero at 0.70E / 80%, and the 0.40E / 90% fraction stays below the
// 0.20E / 95% anchor.
void a5(double frac20) {
    const double frac70 = control_duration(run(0.70, 0.25), 0.80).fraction;
    const double frac40 = control_duration(run(0.40, 0.25), 0.90).fraction;
    const bool ok = frac70 == 0.0 && frac40 <= frac20;
    report("A5", ok,
           "fraction(0.70E,0.80)=" + fmt(frac70) + " fraction(0.40E,0.90)=" + fmt(frac40) +
               " <= " + fmt(frac20));
}

// A6: log-log slope of the effect at T/8 over three decades of splitting.
void a6() {
    const double slope = scaling_exponent({1e-4, 1e-3, 1e-2}, 0.125, {});
    report("A6", slope >= 1.9 && slope <= 2.1, "slope=" + fmt(slope) + " in [1.9, 2.1]");
}

// A7: polynomial fit of the 1e-2E effect series: sign pattern c1>0, c2<0, c3>0
// with RMS residual <= 5% of the effect RMS. The computed effect shape gives
// c2 > 0 and c3 < 0 for every method, form, and window (see notes in the
// project history); the criterion is asserted as stated and reported honestly.
void a7() {
    const Trajectory de = run(1e-2, 0.25);
    const Trajectory ref = run(0.0, 0.25);
    const EffectSeries series = nondegeneracy_effect(de, ref);
    const SystemParams p = make_params(1.0, 1e-2);
    const FitResult fit = fit_effect(series, FitTimeUnit::fraction_of_T, p);

    double ss = 0.0;
    for (std::size_t k = 0; k < series.effect.size(); ++k) {
        const double y = series.effect[k] / 1e-4;
        ss += y * y;
    }
    const double rms = std::sqrt(ss / static_cast<double>(series.effect.size()));
    const bool signs = fit.c1 > 0.0 && fit.c2 < 0.0 && fit.c3 > 0.0;
    const bool residual_ok = fit.residual_norm <= 0.05 * rms;
    report("A7", signs && residual_ok,
           "c1=" + fmt(fit.c1) + " c2=" + fmt(fit.c2) + " c3=" + fmt(fit.c3) +
               " residual/rms=" + fmt(fit.residual_norm / rms) +
               " (reference magnitudes 3.24e-1, -4.76e-3, 6.89e-2 recorded, not asserted)");
}

// A8: the second-order form diverges past T/4 while the matched first-order
// run stays unitary, and the divergence time is non-increasing in the
// splitting. The pole is crossed freely (guard wide open); the
// unitarity-defect threshold is the divergence diagnostic.
void a8() {
    DivergencePolicy through;
    through.tan_guard = 1e300;
    const Trajectory second = run(0.5, 0.35, EquationForm::second_order, through);
    const Trajectory first = run(0.5, 0.35);
    const bool half_ok = second.diverged_at && *second.diverged_at > 0.25 &&
                         *second.diverged_at <= 0.35 && !first.diverged_at &&
                         max_defect(first) <= 1e-8;
    bool monotone = true;
    double prev = 1e300;
    std::string times;
    for (double delta : {0.2, 0.5, 1.0}) {
        const Trajectory traj = run(delta, 0.35, EquationForm::second_order, through);
        const double at = traj.diverged_at.value_or(-1.0);
        monotone = monotone && at > 0.0 && at <= prev;
        prev = at;
        times += fmt(at) + " ";
    }
    report("A8", half_ok && monotone,
           "diverged_at(0.5E)=" + fmt(second.diverged_at.value_or(-1)) +
               " first-order defect=" + fmt(max_defect(first)) + " diverged_at over {0.2,0.5,1.0}E = " +
               times);
}

// A9: the degenerate order-80 series matches the closed form at 0.3T within
// 1e-6, and the zero-coupling radius estimate is unbounded.
void a9() {
    const SystemParams p = make_params(1.0, 0.0);
    const SeriesSolution sol = taylor_coefficients(p, 80);
    const auto eval = evaluate_series(sol, 0.3);
    const AmplitudePair ref = degenerate_amplitudes(p, 0.3);
    const double err =
        std::max(std::abs(eval.value.a11 - ref.a11), std::abs(eval.value.a12 - ref.a12));

    const SystemParams free_p = make_params(1.0, 0.0, 0.0);
    const SeriesSolution free_sol = taylor_coefficients(free_p, 80);
    const bool ok = err <= 1e-6 && std::isinf(free_sol.radius_estimate);
    report("A9", ok,
           "series error at 0.3T=" + fmt(err) +
               " zero-coupling radius=" + fmt(free_sol.radius_estimate));
}

// A10: property bundle — closed-form parity and periodicity, fit round-trip,
// sweep determinism across worker counts, rk4 step-halving order.
void a10() {
    const SystemParams p = make_params(1.0, 0.0);
    bool parity = true, periodic = true;
    for (int k = 1; k <= 64; ++k) {
        const double t = 0.011 * k;
        const AmplitudePair plus = degenerate_amplitudes(p, t);
        const AmplitudePair minus = degenerate_amplitudes(p, -t);
        const AmplitudePair shifted = degenerate_amplitudes(p, t + 1.0);
        parity = parity && std::abs(minus.a11 - plus.a11) < 1e-14 &&
                 std::abs(minus.a12 + plus.a12) < 1e-14;
        periodic = periodic && std::abs(shifted.a11 - plus.a11) < 1e-12 &&
                   std::abs(shifted.a12 - plus.a12) < 1e-12;
    }

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    bool roundtrip = true;
    for (int trial = 0; trial < 5; ++trial) {
        const double c1 = dist(rng), c2 = dist(rng), c3 = dist(rng);
        EffectSeries synth;
        synth.delta_e_over_E = 1e-2;
        for (int k = 1; k <= 400; ++k) {
            const double t = 0.25 * k / 400.0;
            synth.times.push_back(t);
            synth.effect.push_back(1e-4 * (c1 * t * t + c2 * t * t * t + c3 * t * t * t * t));
        }
        const FitResult fit = fit_effect(synth, FitTimeUnit::fraction_of_T, p);
        const double scale = std::max({std::abs(c1), std::abs(c2), std::abs(c3), 1.0});
        roundtrip = roundtrip && std::abs(fit.c1 - c1) <= 1e-8 * scale &&
                    std::abs(fit.c2 - c2) <= 1e-8 * scale &&
                    std::abs(fit.c3 - c3) <= 1e-8 * scale;
    }

    SimConfig cfg;
    cfg.dt_in_hbar_over_H12 = 1e-4;
    const std::vector<double> deltas{0.0, 0.25, 0.5, 0.75, 1.0};
    const std::vector<double> thresholds{0.95, 0.90, 0.80, 0.70};
    auto csv_for = [&](int workers) {
        cfg.workers = workers;
        std::string csv = "delta_e_over_E,threshold,fraction\n";
        for (const auto& pt : duration_sweep(deltas, thresholds, cfg)) {
            csv += io::csv_row({fmt(pt.delta_e_over_E), fmt(pt.threshold),
                                fmt(pt.fraction)});
        }
        return csv;
    };
    const bool deterministic = csv_for(1) == csv_for(4);

    auto defect_at = [&](double dt_units) {
        return max_defect(integrate(p, make_grid(p, 1.0, dt_units),
                                    IntegrationMethod::rk4, EquationForm::first_order));
    };
    const double ratio = defect_at(5e-3) / defect_at(1e-2);
    const bool order_ok = ratio >= std::pow(2.0, -5) && ratio <= std::pow(2.0, -3);

    report("A10", parity && periodic && roundtrip && deterministic && order_ok,
           std::string("parity=") + (parity ? "ok" : "bad") + " periodicity=" +
               (periodic ? "ok" : "bad") + " fit_roundtrip=" + (roundtrip ? "ok" : "bad") +
               " sweep_determinism=" + (deterministic ? "ok" : "bad") +
               " rk4_halving_ratio=" + fmt(ratio));
}

}  // namespace

int main() {
    a1();
    a2_a3();
    const double frac20 = a4();
    a5(frac20);
    a6();
    a7();
    a8();
    a9();
    a10();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
