// types.hpp — domain types, unit conventions, and parameter validation.
//
// Natural units: hbar = 1, period T = 1 in all internal defaults. Inputs and
// outputs express the level splitting as a fraction of the photon energy
// E = 2*pi*hbar/T and time as a fraction of T.

#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qontrol {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// ----------------------------- system parameters ----------------------------

struct SystemParams {
    double period{1.0};    // drive period T
    double coupling{0.0};  // interaction matrix element H12 (energy)
    double delta_e{0.0};   // level splitting E2 - E1 >= 0 (E1 is the zero of energy)
    double hbar{1.0};

    // photon energy E = 2*pi*hbar/T
    double photon_energy() const { return 2.0 * pi * hbar / period; }
    double angular_frequency() const { return 2.0 * pi / period; }
    // dimensionless pulse-area amplitude chi0 = H12*T/hbar; full population
    // transfer at the quarter period requires chi0 = pi/2
    double pulse_area() const { return coupling * period / hbar; }
    double delta_e_over_E() const { return delta_e / photon_energy(); }
};

// Control-condition coupling H12 = pi*hbar/(2T), i.e. chi0 = pi/2.
inline double control_coupling(double period, double hbar = 1.0) {
    return pi * hbar / (2.0 * period);
}

// Build params from the ratio dE/E; coupling defaults to the control condition.
SystemParams make_params(double period, double delta_e_over_E,
                         std::optional<double> coupling_override = std::nullopt,
                         double hbar = 1.0);

inline double photon_energy(const SystemParams& p) { return p.photon_energy(); }

// ----------------------------- amplitudes -----------------------------------

struct AmplitudePair {
    Complex a11{1.0, 0.0};  // amplitude of the initially occupied state
    Complex a12{0.0, 0.0};  // amplitude of the initially empty state

    double p1() const { return std::norm(a11); }
    double p2() const { return std::norm(a12); }
    double unitarity_defect() const { return std::abs(p1() + p2() - 1.0); }
};

struct Probabilities {
    double p1;
    double p2;
};

inline Probabilities probabilities(const AmplitudePair& pair) {
    return {pair.p1(), pair.p2()};
}

// ----------------------------- time grid ------------------------------------

// Uniform grid over [t_start, t_end]. The step count is round(span/dt), so the
// effective step divides the span exactly and t_end is always a sample.
struct TimeGrid {
    double t_start{0.0};
    double t_end{0.0};
    double dt{0.0};

    long n_steps() const;
    double step() const { return (t_end - t_start) / static_cast<double>(n_steps()); }
    // k/N first: sample labels at simple fractions of the span come out exact
    double time_at(long k) const {
        return t_start + (t_end - t_start) *
                             (static_cast<double>(k) / static_cast<double>(n_steps()));
    }
    void validate() const;
};

// ----------------------------- trajectory -----------------------------------

struct Trajectory {
    SystemParams params;
    std::vector<double> times;
    std::vector<AmplitudePair> amplitudes;
    std::vector<double> unitarity_defect;
    std::optional<double> diverged_at;  // first sample whose defect crossed threshold

    std::size_t size() const { return times.size(); }
    double p2_at(std::size_t i) const { return amplitudes[i].p2(); }
    double p1_at(std::size_t i) const { return amplitudes[i].p1(); }
};

// Per-sample |p1 + p2 - 1|, recomputed from the amplitudes.
std::vector<double> unitarity_defect_series(const Trajectory& traj);

// ----------------------------- errors ---------------------------------------

// Second-order stepping got too close to the quarter-period pole of tan.
struct TanGuardError : std::runtime_error {
    double t;
    double tan_value;
    TanGuardError(double t_, double tan_v)
        : std::runtime_error("tan(2*pi*t/T) magnitude " + std::to_string(tan_v) +
                             " exceeds guard at t = " + std::to_string(t_)),
          t(t_), tan_value(tan_v) {}
};

// Unitarity defect crossed the divergence threshold with halting requested.
// Carries the partial trajectory up to the point of divergence.
struct DivergenceError : std::runtime_error {
    Trajectory partial;
    double at;
    DivergenceError(Trajectory traj, double at_)
        : std::runtime_error("trajectory diverged at t = " + std::to_string(at_)),
          partial(std::move(traj)), at(at_) {}
};

// Series coefficient recurrence left the representable range.
struct SeriesOverflowError : std::runtime_error {
    int last_valid_order;
    explicit SeriesOverflowError(int order)
        : std::runtime_error("series coefficients overflowed past order " +
                             std::to_string(order)),
          last_valid_order(order) {}
};

struct EvaluationOverflowError : std::runtime_error {
    EvaluationOverflowError() : std::runtime_error("series partial sum is not finite") {}
};

struct InsufficientOrderError : std::runtime_error {
    explicit InsufficientOrderError(const std::string& what) : std::runtime_error(what) {}
};

struct GridMismatchError : std::runtime_error {
    explicit GridMismatchError(const std::string& what) : std::runtime_error(what) {}
};

struct TrajectoryTooShortError : std::runtime_error {
    explicit TrajectoryTooShortError(const std::string& what) : std::runtime_error(what) {}
};

struct DivergedTrajectoryError : std::runtime_error {
    explicit DivergedTrajectoryError(const std::string& what) : std::runtime_error(what) {}
};

struct EffectBelowNoiseError : std::runtime_error {
    explicit EffectBelowNoiseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qontrol
