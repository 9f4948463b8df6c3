#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rslookback/quadrature.hpp"

namespace rl = rslookback;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
    for (std::size_t n : {1u, 4u, 12u, 16u}) {
        const rl::GaussLegendre gl(n);
        for (std::size_t k = 0; k < 2 * n; ++k) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sum += gl.weights[i] * std::pow(gl.nodes[i], static_cast<double>(k));
            }
            const double exact = k % 2 == 1 ? 0.0 : 2.0 / static_cast<double>(k + 1);
            EXPECT_NEAR(sum, exact, 1e-14) << n << ' ' << k;
        }
    }
}

TEST(QuadratureRule, PanelsSumToIntervalLength) {
    const rl::GaussLegendre gl(8);
    rl::QuadratureRule rule;
    const auto edges = rl::graded_edges(0.0, 2.0, 4, 5);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        rule.add_panel(gl, edges[i], edges[i + 1]);
    }
    double len = 0.0, integral = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        len += rule.w[i];
        integral += rule.w[i] * std::sqrt(2.0 - rule.x[i]);
    }
    EXPECT_NEAR(len, 2.0, 1e-14);
    EXPECT_NEAR(integral, 2.0 / 3.0 * std::pow(2.0, 1.5), 1e-6);
}

TEST(Edges, UniformAndGraded) {
    const auto u = rl::uniform_edges(1.0, 3.0, 4);
    ASSERT_EQ(u.size(), 5u);
    EXPECT_EQ(u.front(), 1.0);
    EXPECT_EQ(u.back(), 3.0);
    const auto g = rl::graded_edges(0.0, 1.0, 2, 3);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g.back(), 1.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        EXPECT_LT(g[i], g[i + 1]);
    }
    // Pieces shrink toward the right end.
    EXPECT_LT(g[g.size() - 1] - g[g.size() - 2], g[2] - g[1]);
}

TEST(ChebyshevAxis, InterpolatesPolynomialsExactly) {
    const rl::ChebyshevAxis axis(0.5, 2.0, 9);
    std::vector<double> v(axis.size());
    auto p = [](double x) { return 1.0 - 2.0 * x + 0.5 * std::pow(x, 5) - 0.1 * std::pow(x, 8); };
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = p(axis.nodes()[i]);
    }
    for (double x = 0.5; x <= 2.0; x += 0.0731) {
        EXPECT_NEAR(axis.interpolate(x, v), p(x), 1e-12);
    }
    EXPECT_EQ(axis.interpolate(axis.nodes()[3], v), v[3]);
    EXPECT_EQ(axis.nodes().front(), 0.5);
    EXPECT_EQ(axis.nodes().back(), 2.0);
}

TEST(ChebyshevAxis, BasisIsPartitionOfUnity) {
    const rl::ChebyshevAxis axis(0.0, 3.0, 12);
    std::vector<double> b(axis.size());
    for (double x : {0.0, 0.123, 1.5, 2.999}) {
        axis.basis(x, b);
        double sum = 0.0;
        for (double w : b) {
            sum += w;
        }
        EXPECT_NEAR(sum, 1.0, 1e-13);
    }
}

TEST(ChebyshevAxis, SpectralConvergenceForSmoothFunction) {
    auto f = [](double x) { return std::exp(-x) * std::sin(3.0 * x); };
    std::vector<double> errors;
    for (std::size_t n : {8u, 16u, 24u}) {
        const rl::ChebyshevAxis axis(0.0, 2.0, n);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = f(axis.nodes()[i]);
        }
        double err = 0.0;
        for (double x = 0.0; x <= 2.0; x += 0.01) {
            err = std::max(err, std::abs(axis.interpolate(x, v) - f(x)));
        }
        errors.push_back(err);
    }
    EXPECT_LT(errors[1], 1e-3 * errors[0]);
    EXPECT_LT(errors[2], 1e-13);
}

TEST(PairwiseSum, MatchesAndIsOrderStable) {
    std::vector<double> v(1001);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 1.0 / static_cast<double>(i + 1);
    }
    double naive = 0.0;
    for (double x : v) {
        naive += x;
    }
    EXPECT_NEAR(rl::pairwise_sum(v), naive, 1e-12);
    EXPECT_EQ(rl::pairwise_sum(v), rl::pairwise_sum(v));
    EXPECT_EQ(rl::pairwise_sum(std::vector<double>{}), 0.0);
}
