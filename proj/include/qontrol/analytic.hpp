// analytic.hpp — closed-form degenerate-limit (delta_e = 0) solution.
//
// a11(t) = cos(chi(t)), a12(t) = i*sin(chi(t)) with drive phase
// chi(t) = chi0 * sin(2*pi*t/T), chi0 = H12*T/hbar. Exactly unitary for all t;
// with chi0 = pi/2 the transfer is complete at t = T/4. This is the primary
// oracle for the numerical modules.

#pragma once

#include "qontrol/types.hpp"

namespace qontrol {

// Drive phase chi(t); odd in t and periodic with period T.
double drive_phase(const SystemParams& params, double t);

// Closed-form amplitudes; the delta_e field is ignored (degenerate limit).
AmplitudePair degenerate_amplitudes(const SystemParams& params, double t);

// |a12(t)|^2 = sin^2(chi(t)).
double degenerate_probability_transfer(const SystemParams& params, double t);

}  // namespace qontrol
