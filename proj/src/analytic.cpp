#include "qontrol/analytic.hpp"

#include <cmath>

namespace qontrol {

double drive_phase(const SystemParams& params, double t) {
    return params.pulse_area() * std::sin(params.angular_frequency() * t);
}

AmplitudePair degenerate_amplitudes(const SystemParams& params, double t) {
    const double chi = drive_phase(params, t);
    return {Complex{std::cos(chi), 0.0}, Complex{0.0, std::sin(chi)}};
}

double degenerate_probability_transfer(const SystemParams& params, double t) {
    const double s = std::sin(drive_phase(params, t));
    return s * s;
}

}  // namespace qontrol
