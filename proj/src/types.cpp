#include "qontrol/types.hpp"

#include <cmath>

namespace qontrol {

SystemParams make_params(double period, double delta_e_over_E,
                         std::optional<double> coupling_override, double hbar) {
    if (!(period > 0.0)) {
        throw std::invalid_argument("period must be positive");
    }
    if (!(hbar > 0.0)) {
        throw std::invalid_argument("hbar must be positive");
    }
    if (delta_e_over_E < 0.0 || !std::isfinite(delta_e_over_E)) {
        throw std::invalid_argument("delta_e_over_E must be finite and >= 0");
    }
    SystemParams p;
    p.period = period;
    p.hbar = hbar;
    p.coupling = coupling_override.value_or(control_coupling(period, hbar));
    if (p.coupling < 0.0 || !std::isfinite(p.coupling)) {
        throw std::invalid_argument("coupling must be finite and >= 0");
    }
    p.delta_e = delta_e_over_E * p.photon_energy();
    return p;
}

long TimeGrid::n_steps() const {
    return std::lround((t_end - t_start) / dt);
}

void TimeGrid::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("grid dt must be positive");
    }
    if (!(t_end > t_start)) {
        throw std::invalid_argument("grid must have t_end > t_start");
    }
    if (n_steps() < 1) {
        throw std::invalid_argument("grid must contain at least one step");
    }
}

std::vector<double> unitarity_defect_series(const Trajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.amplitudes.size());
    for (const auto& a : traj.amplitudes) {
        out.push_back(a.unitarity_defect());
    }
    return out;
}

}  // namespace qontrol
