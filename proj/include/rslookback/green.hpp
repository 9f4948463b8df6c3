#pragma once

namespace rslookback {

/**
 * Green's function of  v_t = (sigma^2/2) v_zz  on z > 0 with the Robin condition
 * v_z + kappa v = 0 at z = 0: two Gaussian images plus the closed-form Robin term
 *
 *   2 kappa exp(kappa (-z - xi + sigma^2 kappa t / 2)) N((sigma^2 kappa t - z - xi) / (sigma sqrt t)).
 *
 * The Robin term is evaluated in log space so large kappa cannot overflow. Requires t > 0.
 */
double green_kernel(double t, double z, double xi, double sigma, double kappa) noexcept;

/// The Robin (third) term of green_kernel on its own.
double green_robin_term(double t, double z, double xi, double sigma, double kappa) noexcept;

/**
 * Propagation kernel of the untransformed operator
 *   d/dtau - (sigma^2/2) d^2/dz^2 + sigma^2 kappa d/dz
 * with a homogeneous Neumann condition at z = 0. Equal to
 *   exp(-sigma^2 kappa^2 t / 2 + kappa (z - xi)) * green_kernel(t, z, xi, sigma, kappa),
 * with the exponential folded into each term analytically:
 *   direct  c exp(-(z - xi - kappa sigma^2 t)^2 / (2 sigma^2 t))
 *   image   c exp(-(z + xi - kappa sigma^2 t)^2 / (2 sigma^2 t) - 2 kappa xi)
 *   Robin   2 kappa exp(-2 kappa xi) N((sigma^2 kappa t - z - xi) / (sigma sqrt t)).
 */
double drift_green_kernel(double t, double z, double xi, double sigma, double kappa) noexcept;

}  // namespace rslookback
