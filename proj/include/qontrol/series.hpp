// series.hpp — power-series solution about t = 0 with empirical
// radius-of-convergence estimation.
//
// The coefficients are generated from the same first-order system the
// integrator propagates (regular coefficients, so the recurrence is
// well-defined to arbitrary order), by convolving with the Taylor expansion
// of the drive rate. Orders above 100 switch to software extended precision:
// double-precision tails underflow and lose the digits the root test needs.

#pragma once

#include "qontrol/types.hpp"

namespace qontrol {

struct SeriesSolution {
    SystemParams params;
    int order{0};                      // highest retained power N
    std::vector<Complex> coeffs_a11;   // alpha_0 .. alpha_N
    std::vector<Complex> coeffs_a12;   // beta_0 .. beta_N
    double radius_estimate{0.0};       // +infinity = unbounded
};

enum class SeriesPrecision {
    automatic,  // extended iff order > 100
    standard,   // double
    extended,   // 50-digit software floats
};

// Generate coefficients through the given order (>= 1). alpha_0 = 1, beta_0 = 0.
// Throws SeriesOverflowError (carrying the last valid order) if the recurrence
// leaves the representable range.
SeriesSolution taylor_coefficients(const SystemParams& params, int order,
                                   SeriesPrecision precision = SeriesPrecision::automatic);

struct SeriesEvaluation {
    AmplitudePair value;
    bool converged;  // last retained term < 1e-12 of the partial sum
};

// Horner evaluation of both partial sums at t. Throws EvaluationOverflowError
// on non-finite partial sums.
SeriesEvaluation evaluate_series(const SeriesSolution& sol, double t);

// Cauchy-Hadamard root-test estimate over the tail (last half of retained
// orders) of kappa_n = max(|alpha_n|, |beta_n|); +infinity when the tail has
// no nonzero entry. Requires order >= 20.
double radius_estimate(const SeriesSolution& sol);

}  // namespace qontrol
