#include "rslookback/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace rslookback {

namespace {

// P_n(x) and P_{n-1}(x) by the three-term recurrence.
std::pair<double, double> legendre(std::size_t n, double x) noexcept {
    double prev = 1.0;
    double cur = x;
    for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double next = ((2.0 * kk - 1.0) * x * cur - (kk - 1.0) * prev) / kk;
        prev = cur;
        cur = next;
    }
    return {cur, prev};
}

}  // namespace

GaussLegendre::GaussLegendre(std::size_t n) : nodes(n), weights(n) {
    if (n == 0) {
        throw std::invalid_argument("GaussLegendre: need at least one node");
    }
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nn + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, q] = legendre(n, x);
            const double dx = p / (nn * (x * p - q) / (x * x - 1.0));
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                break;
            }
        }
        const auto [p, q] = legendre(n, x);
        const double dp = nn * (x * p - q) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        nodes[n / 2] = 0.0;
    }
}

void QuadratureRule::add_panel(const GaussLegendre& gl, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < gl.size(); ++i) {
        x.push_back(mid + half * gl.nodes[i]);
        w.push_back(half * gl.weights[i]);
    }
}

std::vector<double> uniform_edges(double a, double b, std::size_t n) {
    std::vector<double> edges(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        edges[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
    }
    edges[n] = b;
    return edges;
}

std::vector<double> graded_edges(double a, double b, std::size_t n, std::size_t levels) {
    std::vector<double> edges = uniform_edges(a, b, n);
    if (levels <= 1) {
        return edges;
    }
    const double start = edges[n - 1];
    const double width = b - start;
    edges.pop_back();
    for (std::size_t k = 1; k < levels; ++k) {
        edges.push_back(b - width * std::ldexp(1.0, -static_cast<int>(k)));
    }
    edges.push_back(b);
    return edges;
}

ChebyshevAxis::ChebyshevAxis(double a, double b, std::size_t n)
    : lo_(a), hi_(b), nodes_(n), weights_(n) {
    if (n < 2) {
        throw std::invalid_argument("ChebyshevAxis: need at least two nodes");
    }
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double last = static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        nodes_[k] = mid - half * std::cos(std::numbers::pi * static_cast<double>(k) / last);
        weights_[k] = (k % 2 == 0) ? 1.0 : -1.0;
    }
    nodes_.front() = a;
    nodes_.back() = b;
    weights_.front() *= 0.5;
    weights_.back() *= 0.5;
}

void ChebyshevAxis::basis(double x, std::span<double> out) const noexcept {
    const std::size_t n = nodes_.size();
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double diff = x - nodes_[k];
        if (diff == 0.0) {
            for (std::size_t j = 0; j < n; ++j) {
                out[j] = 0.0;
            }
            out[k] = 1.0;
            return;
        }
        out[k] = weights_[k] / diff;
        total += out[k];
    }
    const double inv = 1.0 / total;
    for (std::size_t k = 0; k < n; ++k) {
        out[k] *= inv;
    }
}

double ChebyshevAxis::interpolate(double x, std::span<const double> values) const noexcept {
    const std::size_t n = nodes_.size();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double diff = x - nodes_[k];
        if (diff == 0.0) {
            return values[k];
        }
        const double q = weights_[k] / diff;
        num += q * values[k];
        den += q;
    }
    return num / den;
}

double pairwise_sum(std::span<const double> values) noexcept {
    constexpr std::size_t kBlock = 64;
    if (values.size() <= kBlock) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace rslookback
