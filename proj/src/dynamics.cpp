#include "qontrol/dynamics.hpp"

#include <array>
#include <cmath>

namespace qontrol {

namespace {

constexpr Complex kI{0.0, 1.0};

// Calibrated drive rate; its integral from 0 is the pulse area chi0*sin(w*t).
inline double drive_rate(const SystemParams& p, double t) {
    return p.pulse_area() * p.angular_frequency() *
           std::cos(p.angular_frequency() * t);
}

// Relative phase rate of the occupied amplitude (symmetric ∓delta_e splitting).
inline double detuning_rate(const SystemParams& p) {
    return 2.0 * p.delta_e / p.hbar;
}

using State2 = std::array<Complex, 2>;  // a11, a12
using State4 = std::array<Complex, 4>;  // a11, da11, a12, da12

inline State2 rhs_first(const SystemParams& p, double t, const State2& y) {
    const double g = drive_rate(p, t);
    const double nu = detuning_rate(p);
    return {kI * g * y[1], kI * nu * y[1] + kI * g * y[0]};
}

// Decoupled second-order equations for the same propagated system. Throws when
// the tan coefficient exceeds the guard.
inline State4 rhs_second(const SystemParams& p, double t, const State4& y,
                         double tan_guard) {
    const double w = p.angular_frequency();
    const double tn = std::tan(w * t);
    if (std::abs(tn) > tan_guard) {
        throw TanGuardError(t, tn);
    }
    const double g = drive_rate(p, t);
    const double nu = detuning_rate(p);
    const Complex damp = w * tn - kI * nu;
    return {y[1], -damp * y[1] - g * g * y[0],
            y[3], -damp * y[3] - (g * g - kI * nu * w * tn) * y[2]};
}

template <typename State, typename Rhs>
State step_euler(const Rhs& f, double t, double h, const State& y) {
    const State k1 = f(t, y);
    State out = y;
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] += h * k1[i];
    }
    return out;
}

template <typename State, typename Rhs>
State step_rk4(const Rhs& f, double t, double h, const State& y) {
    auto axpy = [&](const State& base, double c, const State& k) {
        State r = base;
        for (std::size_t i = 0; i < base.size(); ++i) {
            r[i] += c * k[i];
        }
        return r;
    };
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const State k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const State k4 = f(t + h, axpy(y, h, k3));
    State out = y;
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

void push_sample(Trajectory& traj, double t, const AmplitudePair& a,
                 const DivergencePolicy& policy) {
    traj.times.push_back(t);
    traj.amplitudes.push_back(a);
    const double defect = a.unitarity_defect();
    traj.unitarity_defect.push_back(defect);
    if (!traj.diverged_at && defect > policy.defect_threshold) {
        traj.diverged_at = t;
    }
}

}  // namespace

void DivergencePolicy::validate() const {
    if (!(defect_threshold > 0.0)) {
        throw std::invalid_argument("defect_threshold must be positive");
    }
    if (!(tan_guard > 0.0)) {
        throw std::invalid_argument("tan_guard must be positive");
    }
}

AmplitudeRates derivative_first_order(const SystemParams& params, double t,
                                      const AmplitudePair& state) {
    const double c = params.coupling * std::cos(params.angular_frequency() * t);
    const Complex inv_ih = 1.0 / (kI * params.hbar);
    return {inv_ih * c * state.a12,
            inv_ih * (params.delta_e * state.a12 + c * state.a11)};
}

Complex derivative_second_order(const SystemParams& params, double t,
                                const SecondOrderState& state, AmplitudeIndex which,
                                double tan_guard) {
    const double w = params.angular_frequency();
    const double tn = std::tan(w * t);
    if (std::abs(tn) > tan_guard) {
        throw TanGuardError(t, tn);
    }
    const double cs = std::cos(w * t);
    const double h2 = params.coupling / params.hbar;
    const Complex damp = w * tn + kI * params.delta_e / params.hbar;
    Complex potential = h2 * h2 * cs * cs;
    if (which == AmplitudeIndex::a12) {
        potential += kI * (2.0 * pi * params.delta_e / (params.period * params.hbar)) * tn;
    }
    return -damp * state.da - potential * state.a;
}

double dt_from_units(const SystemParams& params, double dt_in_hbar_over_H12) {
    if (!(dt_in_hbar_over_H12 > 0.0)) {
        throw std::invalid_argument("dt must be positive");
    }
    const double h12 = params.coupling > 0.0
                           ? params.coupling
                           : control_coupling(params.period, params.hbar);
    return dt_in_hbar_over_H12 * params.hbar / h12;
}

TimeGrid make_grid(const SystemParams& params, double t_end_over_T,
                   double dt_in_hbar_over_H12) {
    TimeGrid grid{0.0, t_end_over_T * params.period,
                  dt_from_units(params, dt_in_hbar_over_H12)};
    grid.validate();
    return grid;
}

Trajectory integrate(const SystemParams& params, const TimeGrid& grid,
                     IntegrationMethod method, EquationForm form,
                     const DivergencePolicy& policy, const AmplitudePair& initial) {
    grid.validate();
    policy.validate();

    const long n = grid.n_steps();
    const double h = grid.step();

    Trajectory traj;
    traj.params = params;
    traj.times.reserve(n + 1);
    traj.amplitudes.reserve(n + 1);
    traj.unitarity_defect.reserve(n + 1);
    push_sample(traj, grid.t_start, initial, policy);

    auto handle_divergence = [&](double at) {
        if (!traj.diverged_at) {
            traj.diverged_at = at;
        }
        if (policy.halt_on_divergence) {
            throw DivergenceError(traj, *traj.diverged_at);
        }
    };

    if (form == EquationForm::first_order) {
        auto f = [&](double t, const State2& y) { return rhs_first(params, t, y); };
        State2 y{initial.a11, initial.a12};
        for (long k = 0; k < n; ++k) {
            const double t = grid.time_at(k);
            y = method == IntegrationMethod::rk4 ? step_rk4(f, t, h, y)
                                                 : step_euler(f, t, h, y);
            const bool was_diverged = traj.diverged_at.has_value();
            push_sample(traj, grid.time_at(k + 1), {y[0], y[1]}, policy);
            if (!was_diverged && traj.diverged_at) {
                handle_divergence(*traj.diverged_at);
            }
        }
        return traj;
    }

    // Second-order form: initial derivatives come from the propagated
    // first-order system at t_start; any other choice selects a different
    // solution of the second-order equations.
    auto f = [&](double t, const State4& y) {
        return rhs_second(params, t, y, policy.tan_guard);
    };
    const State2 d0 = rhs_first(params, grid.t_start, {initial.a11, initial.a12});
    State4 y{initial.a11, d0[0], initial.a12, d0[1]};
    for (long k = 0; k < n; ++k) {
        const double t = grid.time_at(k);
        try {
            y = method == IntegrationMethod::rk4 ? step_rk4(f, t, h, y)
                                                 : step_euler(f, t, h, y);
        } catch (const TanGuardError& e) {
            // Pole too close: truncate at the last completed sample.
            handle_divergence(e.t);
            return traj;
        }
        const bool was_diverged = traj.diverged_at.has_value();
        push_sample(traj, grid.time_at(k + 1), {y[0], y[2]}, policy);
        if (!was_diverged && traj.diverged_at) {
            handle_divergence(*traj.diverged_at);
        }
    }
    return traj;
}

}  // namespace qontrol
