// dynamics.hpp — fixed-step integration of the driven two-state amplitudes,
// with unitarity monitoring, pole guards, and divergence diagnostics.
//
// Two equation forms are integrated:
//   first_order  — coupled first-order system; coefficients regular for all t.
//                  This is the production path for every metric.
//   second_order — the decoupled second-order equations whose damping
//                  coefficient tan(2*pi*t/T) has a pole at t = T/4. Exists to
//                  probe breakdown behaviour near the pole, not to produce
//                  metrics.
//
// The integrator drives the system with rate
//     g(t) = (H12*T/hbar) * (2*pi/T) * cos(2*pi*t/T),
// so the accumulated pulse area over [0, t] is (H12*T/hbar)*sin(2*pi*t/T) and
// the degenerate closed form of analytic.hpp is recovered exactly. The level
// splitting enters as a symmetric diagonal pair ∓delta_e, i.e. a relative
// phase rate of 2*delta_e/hbar on the occupied amplitude. Both conventions
// are echoed into every run manifest.
//
// derivative_first_order / derivative_second_order evaluate the textbook
// coupled-equation rates (bare H12*cos(2*pi*t/T) coupling, single delta_e)
// at one point; they are diagnostics, not the integration right-hand side.

#pragma once

#include "qontrol/types.hpp"

namespace qontrol {

enum class IntegrationMethod { euler, rk4 };
enum class EquationForm { first_order, second_order };

struct DivergencePolicy {
    double defect_threshold{1e-3};  // unitarity defect above which divergence is declared
    double tan_guard{1e8};          // |tan(2*pi*t/T)| cap for the second-order form
    bool halt_on_divergence{false};
    void validate() const;
};

// ------------------------- textbook rate evaluators --------------------------

struct AmplitudeRates {
    Complex da11;
    Complex da12;
};

// i*hbar*da11 = H12*cos(2*pi*t/T)*a12
// i*hbar*da12 = delta_e*a12 + H12*cos(2*pi*t/T)*a11
AmplitudeRates derivative_first_order(const SystemParams& params, double t,
                                      const AmplitudePair& state);

enum class AmplitudeIndex { a11, a12 };

struct SecondOrderState {
    Complex a;
    Complex da;
};

// Second time derivative of one amplitude:
//   a11:  dda = -[(2*pi/T)*tan(2*pi*t/T) + i*delta_e/hbar]*da
//             - (H12/hbar)^2*cos^2(2*pi*t/T)*a
//   a12:  additional potential term  -i*(2*pi*delta_e/(T*hbar))*tan(2*pi*t/T)*a
// Throws TanGuardError when |tan(2*pi*t/T)| > tan_guard.
Complex derivative_second_order(const SystemParams& params, double t,
                                const SecondOrderState& state, AmplitudeIndex which,
                                double tan_guard = 1e8);

// ------------------------------ integration ----------------------------------

// dt expressed in units of hbar/H12; falls back to the control-condition
// coupling when H12 = 0 (free evolution has no intrinsic rate scale).
double dt_from_units(const SystemParams& params, double dt_in_hbar_over_H12);

// Grid over [0, t_end_over_T * T] with the canonical 1e-5 hbar/H12 default.
TimeGrid make_grid(const SystemParams& params, double t_end_over_T,
                   double dt_in_hbar_over_H12 = 1e-5);

// Fixed-step propagation from a11 = 1, a12 = 0 (overridable initial state).
// Every grid sample is retained. diverged_at is set at the first sample whose
// unitarity defect exceeds policy.defect_threshold, or at a tan-guard trip
// (second-order form), which truncates the trajectory. With
// halt_on_divergence, either event throws DivergenceError carrying the
// partial trajectory.
Trajectory integrate(const SystemParams& params, const TimeGrid& grid,
                     IntegrationMethod method, EquationForm form,
                     const DivergencePolicy& policy = {},
                     const AmplitudePair& initial = {});

}  // namespace qontrol
