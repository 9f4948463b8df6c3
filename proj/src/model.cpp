#include "rslookback/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rslookback/errors.hpp"

namespace rslookback {

namespace {

void check_regime(const RegimeParams& p, const std::string& name) {
    if (!std::isfinite(p.r) || p.r <= 0.0) {
        throw ValidationError(name + ".r: rate must be positive");
    }
    if (!std::isfinite(p.sigma) || p.sigma <= 0.0) {
        throw ValidationError(name + ".sigma: sigma must be positive");
    }
    if (p.mu && !std::isfinite(*p.mu)) {
        throw ValidationError(name + ".mu: drift must be finite");
    }
}

void check_intensity(double lambda, const std::string& name) {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw ValidationError(name + ": intensity must be nonnegative");
    }
}

}  // namespace

double ValidatedModel::r_max() const noexcept {
    return std::max(model_.regime1.r, model_.regime2.r);
}

double ValidatedModel::sigma_max() const noexcept {
    return std::max(model_.regime1.sigma, model_.regime2.sigma);
}

ValidatedModel ValidatedModel::swapped() const {
    MarketModel m;
    m.regime1 = model_.regime2;
    m.regime2 = model_.regime1;
    m.lambda12 = model_.lambda21;
    m.lambda21 = model_.lambda12;
    return ValidatedModel(m);
}

ValidatedModel validate_model(const MarketModel& model) {
    check_regime(model.regime1, "regime1");
    check_regime(model.regime2, "regime2");
    check_intensity(model.lambda12, "lambda12");
    check_intensity(model.lambda21, "lambda21");
    return ValidatedModel(model);
}

void validate_query(const LookbackQuery& q) {
    if (!std::isfinite(q.s) || q.s <= 0.0) {
        throw ValidationError("s: spot must be positive");
    }
    if (!std::isfinite(q.y) || q.y < q.s) {
        throw ValidationError("y: running maximum must be at least the spot");
    }
    if (!std::isfinite(q.t) || q.t < 0.0) {
        throw ValidationError("t: valuation time must be nonnegative");
    }
    if (!std::isfinite(q.T) || q.T <= q.t) {
        throw ValidationError("T: expiry must be after the valuation time");
    }
    if (q.regime != Regime::One && q.regime != Regime::Two) {
        throw ValidationError("regime: must be 1 or 2");
    }
    if (!std::isfinite(q.strike) || q.strike < 0.0) {
        throw ValidationError("strike: must be nonnegative");
    }
}

double alpha_of(const RegimeParams& p) noexcept { return 2.0 * p.r / (p.sigma * p.sigma); }

double kappa_of(const RegimeParams& p) noexcept { return 0.5 * (alpha_of(p) + 1.0); }

ReducedCoordinates reduce(const LookbackQuery& query, const ValidatedModel& model) {
    ReducedCoordinates c;
    c.z = std::log(query.y / query.s);
    c.tau = query.T - query.t;
    c.alpha1 = alpha_of(model.regime(Regime::One));
    c.alpha2 = alpha_of(model.regime(Regime::Two));
    c.kappa1 = 0.5 * (c.alpha1 + 1.0);
    c.kappa2 = 0.5 * (c.alpha2 + 1.0);
    return c;
}

double esscher_parameter(const RegimeParams& regime) {
    if (!regime.mu) {
        throw ValidationError("mu: required for the Esscher parameter");
    }
    return (regime.r - *regime.mu) / regime.sigma;
}

}  // namespace rslookback
