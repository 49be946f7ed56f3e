#include "qontrol/series.hpp"

#include <boost/multiprecision/cpp_complex.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace qontrol {

namespace {

using BigComplex = boost::multiprecision::cpp_complex_50;
using BigReal = BigComplex::value_type;

inline bool finite_all(const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}
inline bool finite_all(const BigComplex& z) {
    return boost::multiprecision::isfinite(z.real()) &&
           boost::multiprecision::isfinite(z.imag());
}

inline double magnitude(const Complex& z) { return std::abs(z); }
inline double magnitude(const BigComplex& z) {
    return static_cast<double>(boost::multiprecision::abs(z));
}

inline Complex to_double(const Complex& z) { return z; }
inline Complex to_double(const BigComplex& z) {
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

// Root-test over the tail (N/2, N] of kappa_n = max(|alpha_n|, |beta_n|),
// computed in the generation precision so deep tails keep their exponents.
template <typename CT>
double tail_radius(const std::vector<CT>& alpha, const std::vector<CT>& beta) {
    const int n_max = static_cast<int>(alpha.size()) - 1;
    double max_root = 0.0;
    for (int n = n_max / 2 + 1; n <= n_max; ++n) {
        using std::abs;
        using std::max;
        using std::pow;
        auto kappa = max(abs(alpha[n]), abs(beta[n]));
        if (kappa > 0) {
            const double root = static_cast<double>(pow(kappa, 1.0 / n));
            max_root = std::max(max_root, root);
        }
    }
    if (max_root == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 / max_root;
}

template <typename CT>
SeriesSolution generate(const SystemParams& p, int order) {
    using RT = typename CT::value_type;
    const CT i_unit{RT(0), RT(1)};
    const RT omega{p.angular_frequency()};
    const RT nu{2.0 * p.delta_e / p.hbar};

    // Taylor coefficients of the drive rate g(t) = chi0*omega*cos(omega*t):
    // G_0 = chi0*omega, G_{2m} = -G_{2m-2}*omega^2/((2m-1)(2m)).
    std::vector<RT> g(order + 1, RT(0));
    g[0] = RT(p.pulse_area()) * omega;
    for (int m = 1; 2 * m <= order; ++m) {
        g[2 * m] = -g[2 * m - 2] * omega * omega / RT((2 * m - 1) * (2 * m));
    }

    std::vector<CT> alpha(order + 1, CT(0)), beta(order + 1, CT(0));
    alpha[0] = CT(1);
    for (int n = 0; n < order; ++n) {
        CT conv_b{0}, conv_a{0};
        for (int m = 0; 2 * m <= n; ++m) {
            conv_b += g[2 * m] * beta[n - 2 * m];
            conv_a += g[2 * m] * alpha[n - 2 * m];
        }
        alpha[n + 1] = i_unit * conv_b / RT(n + 1);
        beta[n + 1] = (i_unit * nu * beta[n] + i_unit * conv_a) / RT(n + 1);
        if (!finite_all(alpha[n + 1]) || !finite_all(beta[n + 1])) {
            throw SeriesOverflowError(n);
        }
    }

    SeriesSolution sol;
    sol.params = p;
    sol.order = order;
    sol.coeffs_a11.reserve(order + 1);
    sol.coeffs_a12.reserve(order + 1);
    for (int n = 0; n <= order; ++n) {
        sol.coeffs_a11.push_back(to_double(alpha[n]));
        sol.coeffs_a12.push_back(to_double(beta[n]));
    }
    sol.radius_estimate = order >= 20 ? tail_radius(alpha, beta)
                                      : std::numeric_limits<double>::infinity();
    return sol;
}

// Horner with a running bound check.
Complex horner(const std::vector<Complex>& c, double t) {
    Complex acc{0.0, 0.0};
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * t + *it;
    }
    return acc;
}

}  // namespace

SeriesSolution taylor_coefficients(const SystemParams& params, int order,
                                   SeriesPrecision precision) {
    if (order < 1) {
        throw std::invalid_argument("series order must be >= 1");
    }
    const bool extended = precision == SeriesPrecision::extended ||
                          (precision == SeriesPrecision::automatic && order > 100);
    return extended ? generate<BigComplex>(params, order)
                    : generate<Complex>(params, order);
}

SeriesEvaluation evaluate_series(const SeriesSolution& sol, double t) {
    const Complex a11 = horner(sol.coeffs_a11, t);
    const Complex a12 = horner(sol.coeffs_a12, t);
    if (!finite_all(a11) || !finite_all(a12)) {
        throw EvaluationOverflowError{};
    }
    const int n = sol.order;
    const double tn = std::pow(std::abs(t), n);
    const double last = std::max(magnitude(sol.coeffs_a11[n]) * tn,
                                 magnitude(sol.coeffs_a12[n]) * tn);
    const double scale = std::max({std::abs(a11), std::abs(a12), 1e-300});
    return {{a11, a12}, last < 1e-12 * scale};
}

double radius_estimate(const SeriesSolution& sol) {
    if (sol.order < 20) {
        throw InsufficientOrderError("radius estimation requires order >= 20");
    }
    return tail_radius(sol.coeffs_a11, sol.coeffs_a12);
}

}  // namespace qontrol
