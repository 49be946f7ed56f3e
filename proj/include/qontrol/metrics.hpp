// metrics.hpp — control-duration, non-degeneracy-effect, scaling, and fit
// metrics over the first quarter period.
//
// Sweep points are independent; duration_sweep runs them on an OpenMP worker
// pool with deterministic output order, and duration_sweep_serial is the
// serial reference kept for testing and benchmarking against it.

#pragma once

#include "qontrol/dynamics.hpp"
#include "qontrol/types.hpp"

#include <optional>
#include <vector>

namespace qontrol {

struct SimConfig {
    IntegrationMethod method{IntegrationMethod::rk4};
    EquationForm form{EquationForm::first_order};
    double dt_in_hbar_over_H12{1e-5};
    DivergencePolicy policy{};
    double period{1.0};
    std::optional<double> coupling_override{};  // default: control condition
    int workers{0};                             // <= 0: machine parallelism

    SystemParams params_for(double delta_e_over_E) const {
        return make_params(period, delta_e_over_E, coupling_override);
    }
};

// ------------------------------ durations ------------------------------------

struct DurationPoint {
    double delta_e_over_E;
    double threshold;
    double fraction;  // measure of {t in [0,T/4]: p2 >= threshold} / (T/4)
};

// Trapezoidal measure of the superlevel set {p2 >= threshold} within
// [0, window_end_over_T * T], as a fraction of the window.
double superlevel_fraction(const Trajectory& traj, double threshold,
                           double window_end_over_T);

// Fraction over the first quarter period. Requires coverage of [0, T/4] and a
// trajectory that has not diverged before T/4.
DurationPoint control_duration(const Trajectory& traj, double threshold);

// Cartesian product of (threshold, delta_e) points, threshold-major
// (descending, matching the canonical 0.95/0.90/0.80/0.70 ordering), delta_e
// ascending. One trajectory is integrated per delta_e and reused across
// thresholds. The parallel version distributes trajectories over
// cfg.workers OpenMP threads; output order and values are identical to the
// serial reference.
std::vector<DurationPoint> duration_sweep(const std::vector<double>& delta_e_over_E,
                                          const std::vector<double>& thresholds,
                                          const SimConfig& cfg);
std::vector<DurationPoint> duration_sweep_serial(const std::vector<double>& delta_e_over_E,
                                                 const std::vector<double>& thresholds,
                                                 const SimConfig& cfg);

// ------------------------------ effect ---------------------------------------

struct EffectSeries {
    double delta_e_over_E{0.0};
    std::vector<double> times;   // fractions of T, within (0, T/4]
    std::vector<double> effect;  // | (p2_dE - p2_0) / p2_0 | as a percentage
};

// Pointwise percentage deviation of the occupied-state probability from the
// degenerate reference. Both trajectories must share one grid; samples where
// the reference transfer is below 1e-12 are defined as 0 (both numerator and
// denominator vanish at matching order as t -> 0).
EffectSeries nondegeneracy_effect(const Trajectory& traj_de, const Trajectory& traj_0);

// Least-squares slope of log(effect at t_probe) vs log(delta_e/E) over the
// given splittings (>= 3 distinct values, all <= 0.1). Throws
// EffectBelowNoiseError when any effect sits within 10x the step-halving
// noise floor of the degenerate run.
double scaling_exponent(const std::vector<double>& delta_e_over_E,
                        double t_probe_over_T, const SimConfig& cfg);

// ------------------------------ fit ------------------------------------------

enum class FitTimeUnit { fraction_of_T, hbar_over_H12 };

struct FitResult {
    double c1{0.0};  // t^2 coefficient
    double c2{0.0};  // t^3 coefficient
    double c3{0.0};  // t^4 coefficient
    double residual_norm{0.0};     // RMS residual of the fitted quantity
    FitTimeUnit time_unit{FitTimeUnit::fraction_of_T};
    double condition_number{0.0};  // of the design matrix (SVD)
};

// Linear least squares of effect/(delta_e/E)^2 onto {t^2, t^3, t^4} over the
// window (fractions of T), via SVD with a condition-number report. The series
// must cover (0, T/4] with at least 100 samples.
FitResult fit_effect(const EffectSeries& series, FitTimeUnit time_unit,
                     const SystemParams& params, double window_start_over_T = 0.0,
                     double window_end_over_T = 0.25);

}  // namespace qontrol
