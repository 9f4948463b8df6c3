#pragma once

#include "rslookback/model.hpp"
#include "rslookback/normal.hpp"

namespace rslookback {

/// The three arguments of the normal CDF in the single-regime lookback formula.
struct DTerms {
    double d_plus = 0.0;
    double d_minus = 0.0;
    double d_prime = 0.0;
};

/// d+- = (-z + (r +- sigma^2/2) tau) / (sigma sqrt(tau)), d' = d+ - (2r/sigma) sqrt(tau).
DTerms d_terms(double z, double r, double sigma, double tau) noexcept;

/// Rates below this make the sigma^2/(2r) factor lose precision; u0 refuses them.
inline constexpr double kMinRateForClosedForm = 1e-6;

/**
 * Closed-form floating-strike lookback put value V/s under a single-regime GBM,
 * as a function of z = ln(y/s) and time to expiry.
 *
 * Returns exactly e^z - 1 at tau = 0. Throws NumericalError when r is below
 * kMinRateForClosedForm.
 */
double u0(double z, double tau, const RegimeParams& regime);

/// Floating-strike lookback put price s * u0(ln(y/s), tau). Requires 0 < s <= y.
double gsg_price(double s, double y, double tau, const RegimeParams& regime);

}  // namespace rslookback
