#include "rslookback/monte_carlo.hpp"

#include <cmath>
#include <random>

#include "rslookback/errors.hpp"
#include "rslookback/quadrature.hpp"

namespace rslookback {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

PathStream::PathStream(std::uint64_t seed, std::uint64_t path_index) noexcept
    : state_(mix(mix(seed) + kGamma * (path_index + 1))) {}

PathStream::result_type PathStream::operator()() noexcept {
    state_ += kGamma;
    return mix(state_);
}

double PathStream::uniform_open() noexcept {
    // 53 random bits shifted by half an ulp: never exactly 0 or 1.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

RegimePath simulate_regime_path(const ValidatedModel& model, double t, double T, Regime start,
                                PathStream& rng) {
    if (!(T > t)) {
        throw ValidationError("mc: need T > t");
    }
    RegimePath path;
    path.switch_times.push_back(t);
    Regime current = start;
    double now = t;
    while (true) {
        path.regimes.push_back(current);
        const double rate = model.exit_intensity(current);
        double next = T;
        if (rate > 0.0) {
            const double hold = -std::log(rng.uniform_open()) / rate;
            next = now + hold < T ? now + hold : T;
        }
        path.switch_times.push_back(next);
        if (next >= T) {
            break;
        }
        now = next;
        current = other(current);
    }
    return path;
}

TerminalState simulate_price_and_max(const ValidatedModel& model, const RegimePath& path, double s,
                                     double y, PathStream& rng, double steps_per_year, bool bridge) {
    std::normal_distribution<double> normal;
    double x = 0.0;                     // ln(S / s)
    double m = std::log(y / s);         // ln(max / s)
    double log_discount = 0.0;
    for (std::size_t k = 0; k < path.n_intervals(); ++k) {
        const double len = path.switch_times[k + 1] - path.switch_times[k];
        if (!(len > 0.0)) {
            continue;
        }
        const auto& p = model.regime(path.regimes[k]);
        log_discount -= p.r * len;
        const auto n = static_cast<long long>(std::max(1.0, std::ceil(len * steps_per_year)));
        const double dt = len / static_cast<double>(n);
        const double drift = (p.r - 0.5 * p.sigma * p.sigma) * dt;
        const double vol = p.sigma * std::sqrt(dt);
        const double var2 = 2.0 * p.sigma * p.sigma * dt;
        for (long long i = 0; i < n; ++i) {
            const double dx = drift + vol * normal(rng);
            if (bridge) {
                const double peak = 0.5 * (dx + std::sqrt(dx * dx - var2 * std::log(rng.uniform_open())));
                m = std::max(m, x + peak);
            }
            x += dx;
            m = std::max(m, x);
        }
    }
    return {s * std::exp(x), s * std::exp(m), log_discount};
}

double mc_path_payoff(const LookbackQuery& query, const ValidatedModel& model,
                      const McConfig& config, std::uint64_t path_index) {
    PathStream rng(config.seed, path_index);
    const RegimePath path = simulate_regime_path(model, query.t, query.T, query.regime, rng);
    const TerminalState st =
        simulate_price_and_max(model, path, query.s, query.y, rng, config.steps_per_year, config.bridge);
    return std::exp(st.log_discount) * (st.y_T - st.s_T);
}

McEstimate mc_price(const LookbackQuery& query, const ValidatedModel& model, const McConfig& config,
                    Execution exec) {
    validate_query(query);
    if (config.n_paths < 2) {
        throw ValidationError("mc.n_paths: need at least 2 paths");
    }
    if (!(config.steps_per_year > 0.0)) {
        throw ValidationError("mc.steps_per_year: must be positive");
    }
    const long long n = config.n_paths;
    std::vector<double> payoff(static_cast<std::size_t>(n));
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < n; ++i) {
            payoff[static_cast<std::size_t>(i)] =
                mc_path_payoff(query, model, config, static_cast<std::uint64_t>(i));
        }
    } else {
        for (long long i = 0; i < n; ++i) {
            payoff[static_cast<std::size_t>(i)] =
                mc_path_payoff(query, model, config, static_cast<std::uint64_t>(i));
        }
    }
    const double nd = static_cast<double>(n);
    const double mean = pairwise_sum(payoff) / nd;
    for (double& v : payoff) {
        v = (v - mean) * (v - mean);
    }
    const double var = pairwise_sum(payoff) / (nd - 1.0);
    if (!std::isfinite(mean) || !std::isfinite(var)) {
        throw NumericalError("mc: non-finite estimate");
    }
    return {mean, std::sqrt(var / nd), n, config.seed};
}

}  // namespace rslookback
