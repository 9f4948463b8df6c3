#include "rslookback/bs_lookback.hpp"

#include <algorithm>
#include <cmath>

#include "rslookback/errors.hpp"

namespace rslookback {

DTerms d_terms(double z, double r, double sigma, double tau) noexcept {
    const double vol = sigma * std::sqrt(tau);
    const double half_var = 0.5 * sigma * sigma;
    DTerms d;
    d.d_plus = (-z + (r + half_var) * tau) / vol;
    d.d_minus = (-z + (r - half_var) * tau) / vol;
    d.d_prime = d.d_plus - (2.0 * r / sigma) * std::sqrt(tau);
    return d;
}

double u0(double z, double tau, const RegimeParams& regime) {
    const double r = regime.r;
    const double sigma = regime.sigma;
    if (r < kMinRateForClosedForm) {
        throw NumericalError("u0: rate below 1e-6 is outside the closed form's numerical domain");
    }
    if (tau <= 0.0) {
        return std::expm1(z);
    }
    const DTerms d = d_terms(z, r, sigma, tau);
    const double alpha = 2.0 * r / (sigma * sigma);
    const double spot_leg = std::exp(z - r * tau) * std_normal_cdf(-d.d_minus);
    const double max_leg = std_normal_cdf(-d.d_plus);
    // e^{-r tau} e^{alpha z} N(d') can overflow in its factors for small sigma; combine in logs.
    const double reflected = std::exp(-r * tau + alpha * z + log_std_normal_cdf(d.d_prime));
    const double value = spot_leg - max_leg + (std_normal_cdf(d.d_plus) - reflected) / alpha;
    if (!std::isfinite(value)) {
        throw NumericalError("u0: non-finite value");
    }
    return std::max(value, 0.0);
}

double gsg_price(double s, double y, double tau, const RegimeParams& regime) {
    if (!(s > 0.0) || !(y >= s)) {
        throw ValidationError("gsg_price: requires 0 < s <= y");
    }
    return s * u0(std::log(y / s), tau, regime);
}

}  // namespace rslookback
