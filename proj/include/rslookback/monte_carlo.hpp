#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "rslookback/execution.hpp"
#include "rslookback/model.hpp"

namespace rslookback {

/**
 * Counter-based random stream: one independent stream per (seed, path index),
 * so a path's draws do not depend on which thread simulates it.
 * SplitMix64 output function over a Weyl sequence started at a hash of both keys.
 */
class PathStream {
public:
    using result_type = std::uint64_t;

    PathStream(std::uint64_t seed, std::uint64_t path_index) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept;

private:
    std::uint64_t state_;
};

/// One sample path of the regime chain on [t, T].
struct RegimePath {
    std::vector<double> switch_times;   ///< interval boundaries, front() == t, back() == T
    std::vector<Regime> regimes;        ///< one per interval, alternating

    std::size_t n_intervals() const noexcept { return regimes.size(); }
    std::size_t n_switches() const noexcept { return regimes.empty() ? 0 : regimes.size() - 1; }
};

struct McConfig {
    long long n_paths = 1'000'000;
    std::uint64_t seed = 20261019;
    double steps_per_year = 32.0;       ///< bridge sub-steps per year of each regime interval
    bool bridge = true;                 ///< false: maximum over sub-step endpoints only

    bool operator==(const McConfig&) const = default;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long n_paths = 0;
    std::uint64_t seed = 0;

    bool operator==(const McEstimate&) const = default;
};

/// Holding times in regime i are Exponential(exit intensity of i); zero intensity is absorbing.
RegimePath simulate_regime_path(const ValidatedModel& model, double t, double T, Regime start,
                                PathStream& rng);

struct TerminalState {
    double s_T = 0.0;
    double y_T = 0.0;
    double log_discount = 0.0;      ///< -sum r_i dt_i along the path
};

/**
 * Exact log-GBM transition with drift r_i - sigma_i^2/2 per sub-step; with bridge on,
 * the sub-step maximum of the log price is drawn from the Brownian-bridge maximum law
 *   M = (dx + sqrt(dx^2 - 2 sigma^2 dt ln U)) / 2.
 */
TerminalState simulate_price_and_max(const ValidatedModel& model, const RegimePath& path, double s,
                                     double y, PathStream& rng, double steps_per_year, bool bridge);

/// Discounted payoff of the floating-strike put, y_T - s_T, for path index `path_index`.
double mc_path_payoff(const LookbackQuery& query, const ValidatedModel& model,
                      const McConfig& config, std::uint64_t path_index);

/// Mean and standard error over n_paths; reduction is pairwise in path order,
/// so Serial and Parallel return identical bits.
McEstimate mc_price(const LookbackQuery& query, const ValidatedModel& model, const McConfig& config,
                    Execution exec = Execution::Parallel);

}  // namespace rslookback
