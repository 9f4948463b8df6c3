#include "rslookback/green.hpp"

#include <cmath>
#include <numbers>

#include "rslookback/normal.hpp"

namespace rslookback {

namespace {

double gaussian_prefactor(double var) noexcept {
    return 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace

double green_robin_term(double t, double z, double xi, double sigma, double kappa) noexcept {
    if (kappa == 0.0) {
        return 0.0;
    }
    const double var = sigma * sigma * t;
    const double arg = (var * kappa - z - xi) / std::sqrt(var);
    const double log_mag = kappa * (-z - xi + 0.5 * var * kappa) + log_std_normal_cdf(arg);
    return 2.0 * kappa * std::exp(log_mag);
}

double green_kernel(double t, double z, double xi, double sigma, double kappa) noexcept {
    const double var = sigma * sigma * t;
    const double images = std::exp(-(z - xi) * (z - xi) / (2.0 * var)) +
                          std::exp(-(z + xi) * (z + xi) / (2.0 * var));
    return gaussian_prefactor(var) * images + green_robin_term(t, z, xi, sigma, kappa);
}

double drift_green_kernel(double t, double z, double xi, double sigma, double kappa) noexcept {
    // Terms whose exponent is below this are exactly zero after exp(); skip the call.
    constexpr double kUnderflow = -745.0;
    const double var = sigma * sigma * t;
    const double shift = kappa * var;
    const double a = z - xi - shift;
    const double b = z + xi - shift;
    const double inv_2var = 0.5 / var;
    double images = std::exp(-a * a * inv_2var);
    const double image_exponent = -b * b * inv_2var - 2.0 * kappa * xi;
    if (image_exponent > kUnderflow) {
        images += std::exp(image_exponent);
    }
    double value = gaussian_prefactor(var) * images;
    if (kappa != 0.0) {
        const double arg = (shift - z - xi) / std::sqrt(var);
        if (arg > -38.0) {
            value += 2.0 * kappa * std::exp(-2.0 * kappa * xi) * std_normal_cdf(arg);
        }
    }
    return value;
}

}  // namespace rslookback
