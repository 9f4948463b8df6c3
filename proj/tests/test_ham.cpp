#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "rslookback/bs_lookback.hpp"
#include "rslookback/errors.hpp"
#include "rslookback/finite_difference.hpp"
#include "rslookback/ham.hpp"
#include "rslookback/monte_carlo.hpp"

namespace rl = rslookback;

namespace {

rl::MarketModel make_model(double s1, double s2, double l12, double l21, double r1 = 0.05,
                           double r2 = 0.03) {
    rl::MarketModel m;
    m.regime1 = {r1, s1, {}};
    m.regime2 = {r2, s2, {}};
    m.lambda12 = l12;
    m.lambda21 = l21;
    return m;
}

rl::LookbackQuery atm(rl::Regime regime = rl::Regime::One, double y = 100.0) {
    return {100.0, y, 0.0, 1.0, regime, rl::OptionStyle::FloatingStrikePut, 0.0};
}

rl::PropagatorCache& shared_cache() {
    static rl::PropagatorCache cache;
    return cache;
}

// Coarse settings for structural tests; accuracy tests use the defaults.
rl::NumericsConfig small_config() {
    rl::NumericsConfig c;
    c.n_tau = 10;
    c.n_z = 12;
    c.quad_nodes = 8;
    c.n_panels_u = 3;
    c.n_panels_xi = 3;
    c.order_max = 6;
    return c;
}

}  // namespace

TEST(NumericsConfig, Validation) {
    EXPECT_NO_THROW(rl::validate_numerics(rl::NumericsConfig{}));
    auto c = rl::NumericsConfig{};
    c.series_tol = 0.0;
    EXPECT_THROW(rl::validate_numerics(c), rl::ValidationError);
    c = {};
    c.z_max_sigmas = 3.0;
    EXPECT_THROW(rl::validate_numerics(c), rl::ValidationError);
    c = {};
    c.quad_nodes = 0;
    EXPECT_THROW(rl::validate_numerics(c), rl::ValidationError);
    c = {};
    c.order_max = -1;
    EXPECT_THROW(rl::validate_numerics(c), rl::ValidationError);
}

TEST(TermAxes, NodesCoverDomain) {
    const rl::TermAxes axes(1.5, 3.0, 9, 11);
    EXPECT_EQ(axes.tau_nodes().front(), 0.0);
    EXPECT_EQ(axes.tau_nodes().back(), 1.5);
    EXPECT_EQ(axes.z_nodes().front(), 0.0);
    EXPECT_EQ(axes.z_nodes().back(), 3.0);
    EXPECT_EQ(axes.size(), 99u);
}

TEST(InitialTerm, ReproducesClosedFormAtNodes) {
    const auto vm = rl::validate_model(make_model(0.2, 0.3, 1, 1));
    auto axes = std::make_shared<const rl::TermAxes>(1.0, 3.0, 12, 14);
    const auto g = rl::initial_term(rl::Regime::Two, vm, axes);
    for (std::size_t j = 0; j < axes->n_tau(); ++j) {
        for (std::size_t k = 0; k < axes->n_z(); ++k) {
            const double expected = rl::u0(axes->z_nodes()[k], axes->tau_nodes()[j], vm.regime(rl::Regime::Two));
            EXPECT_NEAR(g.values[j * axes->n_z() + k], expected, 1e-12);
        }
    }
}

TEST(SourceTerm, VanishesForEqualRegimes) {
    const auto vm = rl::validate_model(make_model(0.2, 0.2, 1, 1, 0.05, 0.05));
    auto axes = std::make_shared<const rl::TermAxes>(1.0, 3.0, 8, 10);
    const auto g1 = rl::initial_term(rl::Regime::One, vm, axes);
    const auto g2 = rl::initial_term(rl::Regime::Two, vm, axes);
    const rl::SourceTerm src(1, g1, g2, rl::Regime::One, vm);
    EXPECT_TRUE(src.vanishes());
    EXPECT_EQ(src(0.5, 0.3), 0.0);
}

TEST(SourceTerm, VanishesForZeroIntensity) {
    const auto vm = rl::validate_model(make_model(0.2, 0.3, 0, 1));
    auto axes = std::make_shared<const rl::TermAxes>(1.0, 3.0, 8, 10);
    const auto g1 = rl::initial_term(rl::Regime::One, vm, axes);
    const auto g2 = rl::initial_term(rl::Regime::Two, vm, axes);
    EXPECT_TRUE(rl::SourceTerm(1, g1, g2, rl::Regime::One, vm).vanishes());
    EXPECT_FALSE(rl::SourceTerm(1, g1, g2, rl::Regime::Two, vm).vanishes());
}

TEST(SourceTerm, MatchesDirectFormula) {
    const auto vm = rl::validate_model(make_model(0.2, 0.4, 1.5, 0.5));
    auto axes = std::make_shared<const rl::TermAxes>(1.0, 3.5, 32, 40);
    const auto g1 = rl::initial_term(rl::Regime::One, vm, axes);
    const auto g2 = rl::initial_term(rl::Regime::Two, vm, axes);
    const double u = 0.5, xi = 0.3;
    for (rl::Regime i : {rl::Regime::One, rl::Regime::Two}) {
        const auto& p = vm.regime(i);
        const double kappa = rl::kappa_of(p);
        const double diff = rl::u0(xi, u, vm.regime(rl::other(i))) - rl::u0(xi, u, p);
        const double expected = vm.exit_intensity(i) *
                                std::exp(0.5 * p.sigma * p.sigma * kappa * kappa * u - kappa * xi) * diff;
        const double got = rl::SourceTerm(1, g1, g2, i, vm)(u, xi);
        EXPECT_NEAR(got, expected, 1e-9 * std::abs(expected));
    }
}

TEST(GreenPropagator, ReproducesTimeIntegralsOfPolynomials) {
    // The kernel integrates to one over xi, so D = 1 maps to tau and D = u to tau^2 / 2,
    // away from the truncated far end of the domain.
    const rl::RegimeParams p{0.05, 0.2, {}};
    auto axes = std::make_shared<const rl::TermAxes>(1.0, 2.0, 16, 24);
    const rl::GreenPropagator prop(p, axes, rl::NumericsConfig{});
    std::vector<double> ones(axes->size(), 1.0), lin(axes->size());
    for (std::size_t j = 0; j < axes->n_tau(); ++j) {
        for (std::size_t k = 0; k < axes->n_z(); ++k) {
            lin[j * axes->n_z() + k] = axes->tau_nodes()[j];
        }
    }
    const auto a = prop.apply(ones);
    const auto b = prop.apply(lin);
    for (std::size_t j = 0; j < axes->n_tau(); ++j) {
        const double tau = axes->tau_nodes()[j];
        for (std::size_t k = 0; k < axes->n_z(); ++k) {
            if (axes->z_nodes()[k] > 0.6) {
                continue;
            }
            EXPECT_NEAR(a[j * axes->n_z() + k], tau, 1e-10) << j << ' ' << k;
            EXPECT_NEAR(b[j * axes->n_z() + k], 0.5 * tau * tau, 1e-10) << j << ' ' << k;
        }
    }
}

TEST(GreenPropagator, SerialAndParallelBuildsAreBitIdentical) {
    const rl::RegimeParams p{0.03, 0.3, {}};
    auto axes = std::make_shared<const rl::TermAxes>(1.0, 3.0, 8, 10);
    const auto cfg = small_config();
    const rl::GreenPropagator serial(p, axes, cfg, rl::Execution::Serial);
    const rl::GreenPropagator parallel(p, axes, cfg, rl::Execution::Parallel);
    EXPECT_EQ(serial.weights(), parallel.weights());
}

TEST(GreenPropagator, ZeroTimeRowsVanish) {
    const rl::RegimeParams p{0.03, 0.3, {}};
    auto axes = std::make_shared<const rl::TermAxes>(1.0, 3.0, 8, 10);
    const rl::GreenPropagator prop(p, axes, small_config());
    for (std::size_t k = 0; k < axes->n_z(); ++k) {
        for (double w : prop.row(0, k)) {
            EXPECT_EQ(w, 0.0);
        }
    }
}

TEST(ComputeTerm, EqualRegimesGiveZeroGrids) {
    const auto vm = rl::validate_model(make_model(0.2, 0.2, 3, 3, 0.05, 0.05));
    const auto cfg = small_config();
    auto axes = std::make_shared<const rl::TermAxes>(1.0, 3.0, 8, 10);
    rl::PropagatorCache cache;
    const auto t = rl::compute_term(1, rl::initial_term(rl::Regime::One, vm, axes),
                                    rl::initial_term(rl::Regime::Two, vm, axes), vm, cfg, cache);
    EXPECT_TRUE(t[0].is_zero());
    EXPECT_TRUE(t[1].is_zero());
    EXPECT_EQ(cache.size(), 0u);
}

TEST(ComputeTerm, OneSidedCoupling) {
    const auto vm = rl::validate_model(make_model(0.2, 0.3, 0, 2));
    const auto cfg = small_config();
    auto axes = std::make_shared<const rl::TermAxes>(1.0, 3.0, 8, 10);
    rl::PropagatorCache cache;
    const auto t = rl::compute_term(1, rl::initial_term(rl::Regime::One, vm, axes),
                                    rl::initial_term(rl::Regime::Two, vm, axes), vm, cfg, cache);
    EXPECT_TRUE(t[0].is_zero());
    EXPECT_FALSE(t[1].is_zero());
    for (std::size_t k = 0; k < axes->n_z(); ++k) {
        EXPECT_EQ(t[1].values[k], 0.0);   // tau = 0 row
    }
}

TEST(ComputeTerm, StableUnderPanelRefinement) {
    const auto vm = rl::validate_model(make_model(0.2, 0.4, 1, 1));
    rl::NumericsConfig base;
    auto refined = base;
    refined.n_panels_u *= 2;
    refined.n_panels_xi *= 2;
    const double z_max = rl::truncated_z_max(0.0, 1.0, vm, base.z_max_sigmas);
    auto axes = std::make_shared<const rl::TermAxes>(1.0, z_max, 16, 20);
    const auto g1 = rl::initial_term(rl::Regime::One, vm, axes);
    const auto g2 = rl::initial_term(rl::Regime::Two, vm, axes);
    rl::PropagatorCache c1, c2;
    const auto a = rl::compute_term(1, g1, g2, vm, base, c1);
    const auto b = rl::compute_term(1, g1, g2, vm, refined, c2);
    for (int i = 0; i < 2; ++i) {
        for (std::size_t n = 0; n < axes->size(); ++n) {
            EXPECT_NEAR(a[i].values[n], b[i].values[n], 0.1 * base.series_tol);
        }
    }
}

TEST(SumSeries, OrderZeroIsClosedForm) {
    const auto vm = rl::validate_model(make_model(0.2, 0.3, 1, 1));
    auto cfg = small_config();
    cfg.order_max = 0;
    const rl::HamEngine engine(vm, cfg, 1.0, 0.2);
    const auto s = engine.evaluate(0.7, 0.1);
    EXPECT_NEAR(s.reduced_value[0], rl::u0(0.1, 0.7, vm.regime(rl::Regime::One)), 1e-12);
    EXPECT_NEAR(s.reduced_value[1], rl::u0(0.1, 0.7, vm.regime(rl::Regime::Two)), 1e-12);
    EXPECT_EQ(s.term_magnitudes[0].size(), 1u);
}

TEST(SumSeries, AsStatedModeDividesByFactorial) {
    const auto vm = rl::validate_model(make_model(0.2, 0.3, 1, 1));
    auto plain = small_config();
    auto stated = plain;
    stated.normalization_mode = rl::NormalizationMode::AsStated;
    const rl::HamEngine engine(vm, plain, 1.0, 0.0);
    const auto a = rl::sum_series(engine.terms(), 1.0, 0.0, plain);
    const auto b = rl::sum_series(engine.terms(), 1.0, 0.0, stated);
    double factorial = 1.0;
    for (std::size_t m = 0; m < a.term_magnitudes[0].size(); ++m) {
        factorial *= m == 0 ? 1.0 : static_cast<double>(m);
        EXPECT_NEAR(b.term_magnitudes[0][m], a.term_magnitudes[0][m] / factorial, 1e-15);
    }
}

TEST(PriceFloating, DecoupledEqualsClosedForm) {
    const auto vm = rl::validate_model(make_model(0.2, 0.35, 0, 0));
    for (rl::Regime i : {rl::Regime::One, rl::Regime::Two}) {
        const auto rep = rl::price_floating(atm(i, 110.0), vm, rl::NumericsConfig{});
        const double expected = rl::gsg_price(100.0, 110.0, 1.0, vm.regime(i));
        EXPECT_NEAR(rep.price, expected, 1e-10 * expected);
        EXPECT_EQ(rep.engine, "ham");
    }
}

TEST(PriceFloating, EqualRegimesEqualClosedForm) {
    const auto vm = rl::validate_model(make_model(0.25, 0.25, 4, 0.5, 0.04, 0.04));
    const auto rep = rl::price_floating(atm(rl::Regime::Two), vm, rl::NumericsConfig{});
    const double expected = rl::gsg_price(100.0, 100.0, 1.0, vm.regime(rl::Regime::One));
    EXPECT_NEAR(rep.price, expected, 1e-10 * expected);
    for (std::size_t m = 1; m < rep.term_magnitudes.size(); ++m) {
        EXPECT_EQ(rep.term_magnitudes[m], 0.0);
    }
}

TEST(PriceFloating, AgreesWithOracles) {
    const auto vm = rl::validate_model(make_model(0.2, 0.4, 1, 1));
    const auto q = atm();
    const auto rep = rl::price_floating(q, vm, rl::NumericsConfig{}, &shared_cache());
    rl::McConfig mc;
    mc.n_paths = 400'000;
    const auto est = rl::mc_price(q, vm, mc);
    EXPECT_LT(std::abs(rep.price - est.mean), 3.0 * est.std_error);
    const auto fd = rl::fd_price(q, vm, rl::FdConfig{});
    EXPECT_LT(std::abs(rep.price - fd.price), 5e-3 * rep.price);
    EXPECT_TRUE(rep.converged);
    EXPECT_LT(rep.truncation_estimate, rep.config_echo.series_tol * rep.reduced_value);
    EXPECT_DOUBLE_EQ(rep.price, q.s * rep.reduced_value);
}

TEST(PriceFloating, PartialSumsSettle) {
    const auto vm = rl::validate_model(make_model(0.2, 0.4, 1, 1));
    const rl::NumericsConfig cfg;
    const rl::HamEngine engine(vm, cfg, 1.0, 0.0, &shared_cache());
    const auto last = engine.evaluate(1.0, 0.0);
    const auto prev = engine.evaluate(1.0, 0.0, cfg.order_max - 1);
    for (int i = 0; i < 2; ++i) {
        EXPECT_LT(std::abs(last.reduced_value[i] - prev.reduced_value[i]),
                  cfg.series_tol * last.reduced_value[i]);
    }
}

TEST(PriceFloating, WarnsWhenTruncatedEarly) {
    const auto vm = rl::validate_model(make_model(0.2, 0.4, 5, 5));
    auto cfg = small_config();
    cfg.order_max = 2;
    const auto rep = rl::price_floating(atm(), vm, cfg);
    EXPECT_FALSE(rep.converged);
    ASSERT_EQ(rep.warnings.size(), 1u);
}

TEST(PriceFloating, RegimeLabelSymmetryIsExact) {
    const auto vm = rl::validate_model(make_model(0.2, 0.3, 1.5, 0.7));
    const auto sw = vm.swapped();
    auto cfg = small_config();
    for (rl::Regime i : {rl::Regime::One, rl::Regime::Two}) {
        const auto a = rl::price_floating(atm(i, 105.0), vm, cfg);
        const auto b = rl::price_floating(atm(rl::other(i), 105.0), sw, cfg);
        EXPECT_EQ(a.price, b.price);
    }
}

TEST(PriceFloating, HomogeneousInSpotAndMax) {
    const auto vm = rl::validate_model(make_model(0.2, 0.3, 1, 1));
    const auto cfg = small_config();
    auto q = atm(rl::Regime::One, 112.0);
    const double base = rl::price_floating(q, vm, cfg).price;
    for (double c : {0.5, 4.0}) {
        auto qc = q;
        qc.s *= c;
        qc.y *= c;
        EXPECT_EQ(rl::price_floating(qc, vm, cfg).price, c * base);
    }
}

TEST(HamEngine, BoundsMonotonicityAndBoundary) {
    const auto vm = rl::validate_model(make_model(0.15, 0.35, 5, 5));
    const rl::NumericsConfig cfg;
    const double z_cover = std::log(1.5);
    const rl::HamEngine engine(vm, cfg, 1.0, z_cover, &shared_cache());
    for (rl::Regime i : {rl::Regime::One, rl::Regime::Two}) {
        double prev = -1.0;
        for (double y = 100.0; y <= 150.0; y += 5.0) {
            const double p = engine.price(atm(i, y)).price;
            EXPECT_GE(p, 0.0);
            EXPECT_GE(p, std::exp(-vm.r_max()) * y - 100.0);
            EXPECT_GE(p, prev);
            prev = p;
        }
        // One-sided derivative at z = 0 of the summed solution.
        const double h = 1e-3;
        for (double tau : {0.25, 1.0}) {
            const auto a = engine.evaluate(tau, 0.0);
            const auto b = engine.evaluate(tau, h);
            const auto c = engine.evaluate(tau, 2 * h);
            const int k = rl::index_of(i);
            const double d = (-3 * a.reduced_value[k] + 4 * b.reduced_value[k] - c.reduced_value[k]) / (2 * h);
            EXPECT_LT(std::abs(d), 1e-3);
        }
    }
}

TEST(HamEngine, TerminalRowIsPayoff) {
    const auto vm = rl::validate_model(make_model(0.2, 0.3, 2, 1));
    const rl::HamEngine engine(vm, small_config(), 1.0, 0.3);
    for (rl::Regime i : {rl::Regime::One, rl::Regime::Two}) {
        const auto grid = engine.summed_grid(i);
        for (std::size_t k = 0; k < engine.axes()->n_z(); ++k) {
            EXPECT_NEAR(grid[k], std::expm1(engine.axes()->z_nodes()[k]), 1e-12);
        }
    }
}

TEST(HamEngine, RejectsQueriesOutsideDomain) {
    const auto vm = rl::validate_model(make_model(0.2, 0.3, 2, 1));
    const rl::HamEngine engine(vm, small_config(), 1.0, 0.1);
    EXPECT_THROW((void)engine.price(atm(rl::Regime::One, 150.0)), rl::ValidationError);
    auto q = atm();
    q.T = 2.0;
    EXPECT_THROW((void)engine.price(q), rl::ValidationError);
}

TEST(PriceFixed, ParityModes) {
    const auto vm = rl::validate_model(make_model(0.2, 0.3, 1, 1));
    const auto cfg = small_config();
    auto q = atm();
    q.style = rl::OptionStyle::FixedStrikeCall;
    const double floating = rl::price_floating(atm(), vm, cfg).price;
    q.strike = 0.0;
    EXPECT_EQ(rl::price_fixed(q, vm, cfg).price, floating);
    q.strike = 100.0;
    const double fixed = rl::price_fixed(q, vm, cfg).price;
    EXPECT_EQ(fixed - floating, 100.0 * std::exp(-0.05));
    EXPECT_NEAR(fixed - floating, 95.1229424500714, 1e-11);
    auto standard = cfg;
    standard.parity_mode = rl::ParityMode::Standard;
    EXPECT_NEAR(rl::price_fixed(q, vm, standard).price, floating + 100.0 - 100.0 * std::exp(-0.05), 1e-12);
    EXPECT_THROW((void)rl::price_fixed(atm(), vm, cfg), rl::ValidationError);
}
