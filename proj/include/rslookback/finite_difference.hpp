#pragma once

#include <cstddef>
#include <vector>

#include "rslookback/model.hpp"

namespace rslookback {

/// Grid sizes of the Crank-Nicolson oracle. z_max <= 0 selects the truncation rule
/// z_query + 8 sigma_max sqrt(tau) + tau (r_max + sigma_max^2 / 2).
struct FdConfig {
    int n_tau = 400;                ///< time steps
    int n_z = 1600;                 ///< space intervals
    double z_max = 0.0;

    bool operator==(const FdConfig&) const = default;
};

/// Solution of the coupled reduced system on a uniform (tau, z) grid.
struct FdGrid {
    std::vector<double> tau_nodes;
    std::vector<double> z_nodes;
    std::vector<double> u1;         ///< [tau index][z index]
    std::vector<double> u2;

    std::size_t n_tau() const noexcept { return tau_nodes.size(); }
    std::size_t n_z() const noexcept { return z_nodes.size(); }
    double at(int regime_index, std::size_t j, std::size_t k) const noexcept {
        return (regime_index == 0 ? u1 : u2)[j * z_nodes.size() + k];
    }
    /// Cubic Lagrange interpolation in z on the final (tau = tau_max) slice.
    double final_value(Regime regime, double z) const;
};

struct FdResult {
    FdGrid grid;
    double price = 0.0;
    double reduced_value = 0.0;
};

/// z_max used by fd_price for this query and config.
double fd_z_max(const LookbackQuery& query, const ValidatedModel& model, const FdConfig& config);

/**
 * Solves, backward from expiry in tau = T - t,
 *   U_i,tau = (sigma_i^2/2) U_i,zz - (r_i + sigma_i^2/2) U_i,z + lambda_i (U_j - U_i)
 * with U_i(0, z) = e^z - 1, a second-order one-sided Neumann condition at z = 0
 * and U_i = e^z e^{-r_i tau} - 1 at z_max. Crank-Nicolson with the coupling implicit
 * (2x2 block tridiagonal solve per step); the first two steps are replaced by four
 * implicit-Euler half steps to damp the corner incompatibility of the payoff.
 *
 * Throws ValidationError if z_max < z + 6 sigma_max sqrt(tau), NumericalError on
 * non-finite values.
 */
FdResult fd_price(const LookbackQuery& query, const ValidatedModel& model, const FdConfig& config);

}  // namespace rslookback
