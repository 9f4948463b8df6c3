#pragma once

namespace rslookback {

/// Standard normal CDF, 0.5 * erfc(-x / sqrt(2)).
double std_normal_cdf(double x) noexcept;

/// log N(x), accurate far into the left tail where N(x) underflows.
double log_std_normal_cdf(double x) noexcept;

}  // namespace rslookback
