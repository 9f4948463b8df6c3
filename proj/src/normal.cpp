#include "rslookback/normal.hpp"

#include <cmath>
#include <numbers>

namespace rslookback {

double std_normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2));
}

double log_std_normal_cdf(double x) noexcept {
    if (x > 0.0) {
        return std::log1p(-std_normal_cdf(-x));
    }
    if (x > -30.0) {
        return std::log(std_normal_cdf(x));
    }
    // Mills-ratio asymptotic series; the truncation error is below 1e-12 for x <= -30.
    const double inv2 = 1.0 / (x * x);
    const double series = 1.0 - inv2 * (1.0 - inv2 * (3.0 - inv2 * (15.0 - 105.0 * inv2)));
    return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

}  // namespace rslookback
