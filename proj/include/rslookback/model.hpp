#pragma once

#include <optional>

namespace rslookback {

/// Parameters of one regime of the Markov-modulated GBM.
struct RegimeParams {
    double r = 0.0;                 ///< risk-free rate, per year
    double sigma = 0.0;             ///< volatility, per sqrt-year
    std::optional<double> mu;       ///< real-world drift; only used by esscher_parameter

    bool operator==(const RegimeParams&) const = default;
};

/// Two-state economy. The chain generator is [[-lambda12, lambda12], [lambda21, -lambda21]].
struct MarketModel {
    RegimeParams regime1;
    RegimeParams regime2;
    double lambda12 = 0.0;          ///< switching intensity 1 -> 2, per year
    double lambda21 = 0.0;          ///< switching intensity 2 -> 1, per year

    bool operator==(const MarketModel&) const = default;
};

/// Regime index, 1 or 2.
enum class Regime : int { One = 1, Two = 2 };

constexpr Regime other(Regime i) noexcept { return i == Regime::One ? Regime::Two : Regime::One; }
constexpr int index_of(Regime i) noexcept { return static_cast<int>(i) - 1; }

/// A MarketModel whose invariants have been checked. Only validate_model creates one.
class ValidatedModel {
public:
    const MarketModel& raw() const noexcept { return model_; }
    const RegimeParams& regime(Regime i) const noexcept {
        return i == Regime::One ? model_.regime1 : model_.regime2;
    }
    /// Intensity of leaving regime i; this is the coupling coefficient of regime i's equation.
    double exit_intensity(Regime i) const noexcept {
        return i == Regime::One ? model_.lambda12 : model_.lambda21;
    }
    double r_max() const noexcept;
    double sigma_max() const noexcept;

    /// The same economy with the regime labels exchanged.
    ValidatedModel swapped() const;

private:
    explicit ValidatedModel(const MarketModel& m) : model_(m) {}
    friend ValidatedModel validate_model(const MarketModel& model);

    MarketModel model_;
};

/// Checks r > 0, sigma > 0 (and finite) per regime and nonnegative finite intensities.
/// Throws ValidationError naming the offending field.
ValidatedModel validate_model(const MarketModel& model);

enum class OptionStyle { FloatingStrikePut, FixedStrikeCall };

/// What to price: spot, running maximum, valuation time, expiry and current regime.
struct LookbackQuery {
    double s = 0.0;
    double y = 0.0;
    double t = 0.0;
    double T = 0.0;
    Regime regime = Regime::One;
    OptionStyle style = OptionStyle::FloatingStrikePut;
    double strike = 0.0;            ///< fixed-strike calls only

    bool operator==(const LookbackQuery&) const = default;
};

/// Throws ValidationError unless 0 < s <= y, 0 <= t < T and strike >= 0.
void validate_query(const LookbackQuery& query);

/// Log max-to-spot ratio, time to expiry, and the per-regime dimensionless constants.
struct ReducedCoordinates {
    double z = 0.0;
    double tau = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
};

/// alpha = 2 r / sigma^2.
double alpha_of(const RegimeParams& p) noexcept;
/// kappa = (alpha + 1) / 2.
double kappa_of(const RegimeParams& p) noexcept;

/// z = ln(y/s), tau = T - t, alpha_i, kappa_i.
ReducedCoordinates reduce(const LookbackQuery& query, const ValidatedModel& model);

/// Esscher parameter (r - mu) / sigma. Throws ValidationError when mu is absent.
double esscher_parameter(const RegimeParams& regime);

}  // namespace rslookback
