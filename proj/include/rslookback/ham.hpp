#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "rslookback/execution.hpp"
#include "rslookback/model.hpp"
#include "rslookback/quadrature.hpp"

namespace rslookback {

/// How the recursion outputs are combined into the price.
enum class NormalizationMode {
    PlainSum,   ///< U = sum_m c^m
    AsStated,   ///< U = sum_m c^m / m!
};

/// Which fixed-strike parity is applied on top of the floating price.
enum class ParityMode {
    AsStated,   ///< C = V + K e^{-r_i tau}
    Standard,   ///< C = V + s - K e^{-r_i tau}
};

/**
 * Every tuning knob of the series engine. The defaults here are the single
 * source of defaults; the CLI prints them in its help text.
 */
struct NumericsConfig {
    int order_max = 48;             ///< series truncation order M
    int n_tau = 32;                 ///< Chebyshev nodes in sqrt(tau)
    int n_z = 40;                   ///< Chebyshev nodes in z
    double z_max_sigmas = 8.0;      ///< c in z_max = z + c sigma_max sqrt(tau) + tau (r_max + sigma_max^2 / 2)
    int quad_nodes = 12;            ///< Gauss-Legendre nodes per panel
    int n_panels_u = 6;             ///< uniform time panels; the last is split into as many graded pieces
    int n_panels_xi = 6;            ///< panels across the kernel window in xi
    double series_tol = 1e-6;       ///< relative tail tolerance
    NormalizationMode normalization_mode = NormalizationMode::PlainSum;
    ParityMode parity_mode = ParityMode::AsStated;

    bool operator==(const NumericsConfig&) const = default;
};

/// Throws ValidationError if a count is below its minimum, series_tol <= 0 or z_max_sigmas < 4.
void validate_numerics(const NumericsConfig& config);

/// Upper end of the z domain: z_cover + c sigma_max sqrt(tau) + tau (r_max + sigma_max^2 / 2).
double truncated_z_max(double z_cover, double tau, const ValidatedModel& model, double z_max_sigmas);

/**
 * Tensor grid shared by every series term: Chebyshev-Lobatto nodes in s = sqrt(tau)
 * on [0, sqrt(tau_max)] and in z on [0, z_max]. Values are stored row-major with
 * the tau index outermost.
 */
class TermAxes {
public:
    TermAxes(double tau_max, double z_max, std::size_t n_tau, std::size_t n_z);

    std::size_t n_tau() const noexcept { return s_axis_.size(); }
    std::size_t n_z() const noexcept { return z_axis_.size(); }
    std::size_t size() const noexcept { return n_tau() * n_z(); }
    double tau_max() const noexcept { return tau_max_; }
    double z_max() const noexcept { return z_axis_.hi(); }

    const std::vector<double>& tau_nodes() const noexcept { return tau_nodes_; }
    const std::vector<double>& z_nodes() const noexcept { return z_axis_.nodes(); }
    const ChebyshevAxis& s_axis() const noexcept { return s_axis_; }
    const ChebyshevAxis& z_axis() const noexcept { return z_axis_; }

    /// Spectral interpolation of grid values at (tau, z).
    double interpolate(std::span<const double> values, double tau, double z) const;

    bool operator==(const TermAxes& o) const noexcept {
        return tau_max_ == o.tau_max_ && z_max() == o.z_max() && n_tau() == o.n_tau() &&
               n_z() == o.n_z();
    }

private:
    double tau_max_;
    ChebyshevAxis s_axis_;
    ChebyshevAxis z_axis_;
    std::vector<double> tau_nodes_;
};

/// One series term of one regime tabulated on the shared axes.
struct TermGrid {
    int m = 0;
    Regime regime = Regime::One;
    std::shared_ptr<const TermAxes> axes;
    std::vector<double> values;
    /// Set for the order-zero term: at() then evaluates u0 exactly instead of interpolating.
    std::optional<RegimeParams> closed_form;

    double at(double tau, double z) const;
    bool is_zero() const noexcept;
};

/// Order-zero term: the single-regime closed form u0 at every node.
TermGrid initial_term(Regime regime, const ValidatedModel& model,
                      std::shared_ptr<const TermAxes> axes);

/**
 * Source of order m for regime i in the heat-equation variables,
 *   lambda_i exp(sigma_i^2 kappa_i^2 u / 2 - kappa_i xi) (U_j^{m-1} - U_i^{m-1})(u, xi),
 * with u the time to expiry and the previous terms read through their interpolants.
 */
class SourceTerm {
public:
    SourceTerm(int m, const TermGrid& prev1, const TermGrid& prev2, Regime regime,
               const ValidatedModel& model);

    double operator()(double u, double xi) const;
    bool vanishes() const noexcept { return vanishes_; }

private:
    const TermGrid* own_;
    const TermGrid* other_;
    double lambda_;
    double sigma_;
    double kappa_;
    bool vanishes_;
};

/**
 * Linear map from the grid values of a previous-order difference D = U_j - U_i to
 * the next term of regime i (before the intensity factor):
 *
 *   out(tau, z) = int_0^tau int_0^{z_max} K(tau - u, z, xi) D(u, xi) dxi du,
 *
 * K = drift_green_kernel. D enters through its tensor Chebyshev interpolant, so the
 * double integral reduces to fixed weights per (node, node) pair that depend only on
 * the regime, the axes and the quadrature settings. The time integral runs in
 * theta with u = tau sin^2(theta), which makes both sqrt(u) at u = 0 and sqrt(tau - u)
 * at u = tau analytic; panels are graded toward the kernel singularity at u = tau.
 * The xi integral covers the window z -+ (c sigma sqrt(t) + kappa sigma^2 t).
 */
class GreenPropagator {
public:
    GreenPropagator(const RegimeParams& regime, std::shared_ptr<const TermAxes> axes,
                    const NumericsConfig& config, Execution exec = Execution::Parallel);

    std::vector<double> apply(std::span<const double> difference) const;

    /// Weight row for one output node, for inspection.
    std::span<const double> row(std::size_t tau_index, std::size_t z_index) const;
    const std::vector<double>& weights() const noexcept { return weights_; }
    const TermAxes& axes() const noexcept { return *axes_; }

private:
    struct Scratch;
    void build_row(std::size_t node, Scratch& scratch);

    RegimeParams regime_;
    std::shared_ptr<const TermAxes> axes_;
    NumericsConfig config_;
    GaussLegendre gl_;
    QuadratureRule theta_rule_;
    std::vector<double> z_coeff_;   // [n][q]: Chebyshev coefficient n of the z basis polynomial q
    std::vector<double> weights_;
};

/// Shares propagators between engines with identical regime, axes and quadrature settings.
class PropagatorCache {
public:
    std::shared_ptr<const GreenPropagator> get(const RegimeParams& regime,
                                               std::shared_ptr<const TermAxes> axes,
                                               const NumericsConfig& config,
                                               Execution exec = Execution::Parallel);
    std::size_t size() const;

private:
    using Key = std::tuple<double, double, double, double, std::size_t, std::size_t, int, int,
                           int, double>;
    mutable std::mutex mutex_;
    std::map<Key, std::shared_ptr<const GreenPropagator>> entries_;
};

/**
 * Order-m terms of both regimes from the order-(m-1) pair. A regime whose intensity
 * is zero, or whose difference grid is identically zero, gets an exact zero grid
 * without building a propagator. Throws NumericalError on non-finite output.
 */
std::array<TermGrid, 2> compute_term(int m, const TermGrid& prev1, const TermGrid& prev2,
                                     const ValidatedModel& model, const NumericsConfig& config,
                                     PropagatorCache& cache, Execution exec = Execution::Parallel);

/// Partial sums at one point.
struct SeriesSum {
    std::array<double, 2> reduced_value{};
    std::array<std::vector<double>, 2> term_magnitudes;
    std::array<bool, 2> converged{true, true};
};

/// Sums orders 0..terms.size()-1 at (tau, z) per the normalization mode.
SeriesSum sum_series(std::span<const std::array<TermGrid, 2>> terms, double tau, double z,
                     const NumericsConfig& config);

struct PriceReport {
    double price = 0.0;
    double reduced_value = 0.0;
    std::vector<double> term_magnitudes;
    double truncation_estimate = 0.0;
    std::string engine = "ham";
    NumericsConfig config_echo;
    bool converged = true;
    std::vector<std::string> warnings;
};

/**
 * The series for one model on one (tau, z) domain. Construction computes every term
 * up to config.order_max; queries with tau <= tau_max and z <= z_cover are then
 * answered by interpolation. Safe for concurrent const use.
 */
class HamEngine {
public:
    HamEngine(const ValidatedModel& model, const NumericsConfig& config, double tau_max,
              double z_cover, PropagatorCache* cache = nullptr,
              Execution exec = Execution::Parallel);

    const ValidatedModel& model() const noexcept { return model_; }
    const NumericsConfig& config() const noexcept { return config_; }
    const std::shared_ptr<const TermAxes>& axes() const noexcept { return axes_; }
    const std::vector<std::array<TermGrid, 2>>& terms() const noexcept { return terms_; }
    double z_cover() const noexcept { return z_cover_; }

    /// Partial sums through `order` (default: all computed terms).
    SeriesSum evaluate(double tau, double z, int order = -1) const;

    /// Summed grid values of one regime through `order`.
    std::vector<double> summed_grid(Regime regime, int order = -1) const;

    PriceReport price(const LookbackQuery& query) const;

private:
    ValidatedModel model_;
    NumericsConfig config_;
    double z_cover_;
    std::shared_ptr<const TermAxes> axes_;
    std::vector<std::array<TermGrid, 2>> terms_;
};

/// Floating-strike put price from a fresh engine sized to the query.
PriceReport price_floating(const LookbackQuery& query, const ValidatedModel& model,
                           const NumericsConfig& config, PropagatorCache* cache = nullptr);

/// Fixed-strike call through lookback put-call parity (config.parity_mode).
PriceReport price_fixed(const LookbackQuery& query, const ValidatedModel& model,
                        const NumericsConfig& config, PropagatorCache* cache = nullptr);

/// Strike leg added by the parity: K e^{-r_i tau} (as stated) or s - K e^{-r_i tau}.
double parity_adjustment(const LookbackQuery& query, const ValidatedModel& model,
                         ParityMode mode);

}  // namespace rslookback
