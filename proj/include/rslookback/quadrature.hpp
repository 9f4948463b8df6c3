#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rslookback {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t n);
    std::size_t size() const noexcept { return nodes.size(); }
};

/// A flat list of abscissae and weights built by mapping a GaussLegendre rule onto panels.
struct QuadratureRule {
    std::vector<double> x;
    std::vector<double> w;

    void clear() noexcept {
        x.clear();
        w.clear();
    }
    /// Appends the rule mapped onto [a, b].
    void add_panel(const GaussLegendre& gl, double a, double b);
};

/// Panel edges splitting [a, b] into n equal panels.
std::vector<double> uniform_edges(double a, double b, std::size_t n);

/**
 * Panel edges on [a, b]: n equal panels, with the last one further split into
 * `levels` geometrically shrinking pieces toward b (edges at b - w 2^{-k}).
 */
std::vector<double> graded_edges(double a, double b, std::size_t n, std::size_t levels);

/**
 * Chebyshev-Lobatto points on [a, b] in ascending order with barycentric weights.
 * Both endpoints are nodes.
 */
class ChebyshevAxis {
public:
    ChebyshevAxis() = default;
    ChebyshevAxis(double a, double b, std::size_t n);

    std::size_t size() const noexcept { return nodes_.size(); }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }

    /// Lagrange basis values l_k(x) for every node k; `out` must have size() entries.
    void basis(double x, std::span<double> out) const noexcept;

    /// Value at x of the polynomial through (nodes, values).
    double interpolate(double x, std::span<const double> values) const noexcept;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Pairwise (cascade) summation in fixed order.
double pairwise_sum(std::span<const double> values) noexcept;

}  // namespace rslookback
