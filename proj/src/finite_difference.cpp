#include "rslookback/finite_difference.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rslookback/errors.hpp"

namespace rslookback {

namespace {

struct Vec2 {
    double a = 0.0;
    double b = 0.0;
};

struct Mat2 {
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

    static Mat2 diag(double d0, double d1) { return {d0, 0.0, 0.0, d1}; }
    Mat2 inverse() const {
        const double det = a00 * a11 - a01 * a10;
        if (det == 0.0 || !std::isfinite(det)) {
            throw NumericalError("fd: singular 2x2 block");
        }
        return {a11 / det, -a01 / det, -a10 / det, a00 / det};
    }
};

Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a00 * y.a00 + x.a01 * y.a10, x.a00 * y.a01 + x.a01 * y.a11,
            x.a10 * y.a00 + x.a11 * y.a10, x.a10 * y.a01 + x.a11 * y.a11};
}
Vec2 operator*(const Mat2& x, const Vec2& v) {
    return {x.a00 * v.a + x.a01 * v.b, x.a10 * v.a + x.a11 * v.b};
}
Mat2 operator+(const Mat2& x, const Mat2& y) {
    return {x.a00 + y.a00, x.a01 + y.a01, x.a10 + y.a10, x.a11 + y.a11};
}
Mat2 operator-(const Mat2& x, const Mat2& y) {
    return {x.a00 - y.a00, x.a01 - y.a01, x.a10 - y.a10, x.a11 - y.a11};
}
Vec2 operator-(const Vec2& x, const Vec2& y) { return {x.a - y.a, x.b - y.b}; }

// Per-regime coefficients of the semi-discrete operator on a uniform grid.
struct Stencil {
    std::array<double, 2> lower{};   // multiplies U_{k-1}
    std::array<double, 2> centre{};  // multiplies U_k (diffusion part only)
    std::array<double, 2> upper{};   // multiplies U_{k+1}
    std::array<double, 2> lambda{};
};

Stencil make_stencil(const ValidatedModel& model, double h) {
    Stencil st;
    for (int i = 0; i < 2; ++i) {
        const auto& p = model.regime(i == 0 ? Regime::One : Regime::Two);
        const double diff = 0.5 * p.sigma * p.sigma / (h * h);
        const double adv = (p.r + 0.5 * p.sigma * p.sigma) / (2.0 * h);
        st.lower[i] = diff + adv;
        st.centre[i] = -2.0 * diff;
        st.upper[i] = diff - adv;
        st.lambda[i] = model.exit_intensity(i == 0 ? Regime::One : Regime::Two);
    }
    return st;
}

// (A U)_k for an interior node.
Vec2 apply_operator(const Stencil& st, const Vec2& lo, const Vec2& mid, const Vec2& hi) {
    return {st.lower[0] * lo.a + st.centre[0] * mid.a + st.upper[0] * hi.a +
                st.lambda[0] * (mid.b - mid.a),
            st.lower[1] * lo.b + st.centre[1] * mid.b + st.upper[1] * hi.b +
                st.lambda[1] * (mid.a - mid.b)};
}

// One theta-scheme step from `cur` to `next` over dt; next[N] is preset to the boundary.
void theta_step(const Stencil& st, double theta, double dt, const std::vector<Vec2>& cur,
                std::vector<Vec2>& next, std::vector<Mat2>& cp, std::vector<Vec2>& rp) {
    const std::size_t n = cur.size() - 1;
    const double ti = theta * dt;
    const double te = (1.0 - theta) * dt;
    const Mat2 lower = Mat2::diag(-ti * st.lower[0], -ti * st.lower[1]);
    const Mat2 upper = Mat2::diag(-ti * st.upper[0], -ti * st.upper[1]);
    const Mat2 centre{1.0 - ti * (st.centre[0] - st.lambda[0]), -ti * st.lambda[0],
                      -ti * st.lambda[1], 1.0 - ti * (st.centre[1] - st.lambda[1])};

    auto rhs = [&](std::size_t k) {
        const Vec2 a = apply_operator(st, cur[k - 1], cur[k], cur[k + 1]);
        return Vec2{cur[k].a + te * a.a, cur[k].b + te * a.b};
    };

    // Row 0: -3 X0 + 4 X1 - X2 = 0, with X2 eliminated through row 1.
    const Mat2 upper_inv = upper.inverse();
    const Mat2 b0 = Mat2::diag(-3.0, -3.0) + upper_inv * lower;
    const Mat2 c0 = Mat2::diag(4.0, 4.0) + upper_inv * centre;
    const Vec2 r0 = upper_inv * rhs(1);
    const Mat2 b0_inv = b0.inverse();
    cp[0] = b0_inv * c0;
    rp[0] = b0_inv * r0;
    for (std::size_t k = 1; k < n; ++k) {
        const Mat2 m_inv = (centre - lower * cp[k - 1]).inverse();
        Vec2 r = rhs(k);
        if (k == n - 1) {
            r = r - upper * next[n];
            cp[k] = Mat2{};
        } else {
            cp[k] = m_inv * upper;
        }
        rp[k] = m_inv * (r - lower * rp[k - 1]);
    }
    for (std::size_t k = n; k-- > 0;) {
        next[k] = rp[k] - cp[k] * next[k + 1];
    }
}

}  // namespace

double FdGrid::final_value(Regime regime, double z) const {
    const std::size_t nz = z_nodes.size();
    const std::size_t last = tau_nodes.size() - 1;
    const double h = z_nodes[1] - z_nodes[0];
    const auto ri = static_cast<int>(index_of(regime));
    const double pos = z / h;
    const auto nearest = static_cast<std::size_t>(std::llround(pos));
    if (nearest < nz && std::abs(pos - static_cast<double>(nearest)) < 1e-12) {
        return at(ri, last, nearest);
    }
    std::size_t k0 = static_cast<std::size_t>(std::floor(pos));
    k0 = k0 == 0 ? 0 : k0 - 1;
    k0 = std::min(k0, nz - 4);
    double value = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double basis = 1.0;
        for (std::size_t j = 0; j < 4; ++j) {
            if (j != i) {
                basis *= (z - z_nodes[k0 + j]) / (z_nodes[k0 + i] - z_nodes[k0 + j]);
            }
        }
        value += basis * at(ri, last, k0 + i);
    }
    return value;
}

double fd_z_max(const LookbackQuery& query, const ValidatedModel& model, const FdConfig& config) {
    if (config.z_max > 0.0) {
        return config.z_max;
    }
    const double tau = query.T - query.t;
    const double sig = model.sigma_max();
    return std::log(query.y / query.s) + 8.0 * sig * std::sqrt(tau) +
           tau * (model.r_max() + 0.5 * sig * sig);
}

FdResult fd_price(const LookbackQuery& query, const ValidatedModel& model, const FdConfig& config) {
    validate_query(query);
    if (config.n_tau < 2 || config.n_z < 4) {
        throw ValidationError("fd: need n_tau >= 2 and n_z >= 4");
    }
    const double tau = query.T - query.t;
    const double z_query = std::log(query.y / query.s);
    const double z_max = fd_z_max(query, model, config);
    if (!(z_max >= z_query + 6.0 * model.sigma_max() * std::sqrt(tau))) {
        throw ValidationError("fd.z_max: must be at least z + 6 sigma_max sqrt(tau)");
    }

    const auto nt = static_cast<std::size_t>(config.n_tau);
    const auto nz = static_cast<std::size_t>(config.n_z);
    const double h = z_max / static_cast<double>(nz);
    const double dt = tau / static_cast<double>(nt);
    const Stencil st = make_stencil(model, h);
    const double r1 = model.regime(Regime::One).r;
    const double r2 = model.regime(Regime::Two).r;

    FdResult res;
    FdGrid& g = res.grid;
    g.tau_nodes.resize(nt + 1);
    g.z_nodes.resize(nz + 1);
    for (std::size_t j = 0; j <= nt; ++j) {
        g.tau_nodes[j] = dt * static_cast<double>(j);
    }
    g.tau_nodes.back() = tau;
    for (std::size_t k = 0; k <= nz; ++k) {
        g.z_nodes[k] = h * static_cast<double>(k);
    }
    g.z_nodes.back() = z_max;
    g.u1.assign((nt + 1) * (nz + 1), 0.0);
    g.u2.assign((nt + 1) * (nz + 1), 0.0);

    std::vector<Vec2> cur(nz + 1), next(nz + 1), rp(nz + 1);
    std::vector<Mat2> cp(nz + 1);
    for (std::size_t k = 0; k <= nz; ++k) {
        const double payoff = std::expm1(g.z_nodes[k]);
        cur[k] = {payoff, payoff};
    }
    auto store = [&](std::size_t j, const std::vector<Vec2>& v) {
        for (std::size_t k = 0; k <= nz; ++k) {
            g.u1[j * (nz + 1) + k] = v[k].a;
            g.u2[j * (nz + 1) + k] = v[k].b;
        }
    };
    auto far_boundary = [&](double tt) {
        const double e = std::exp(z_max);
        return Vec2{e * std::exp(-r1 * tt) - 1.0, e * std::exp(-r2 * tt) - 1.0};
    };
    store(0, cur);

    constexpr std::size_t kSmoothingSteps = 2;
    for (std::size_t j = 1; j <= nt; ++j) {
        if (j <= kSmoothingSteps) {
            const double half = 0.5 * dt;
            const double t_mid = g.tau_nodes[j - 1] + half;
            next[nz] = far_boundary(t_mid);
            theta_step(st, 1.0, half, cur, next, cp, rp);
            std::swap(cur, next);
            next[nz] = far_boundary(g.tau_nodes[j]);
            theta_step(st, 1.0, half, cur, next, cp, rp);
        } else {
            next[nz] = far_boundary(g.tau_nodes[j]);
            theta_step(st, 0.5, dt, cur, next, cp, rp);
        }
        std::swap(cur, next);
        for (const Vec2& v : cur) {
            if (!std::isfinite(v.a) || !std::isfinite(v.b)) {
                throw NumericalError("fd: non-finite value");
            }
        }
        store(j, cur);
    }

    res.reduced_value = g.final_value(query.regime, z_query);
    res.price = query.s * res.reduced_value;
    return res;
}

}  // namespace rslookback
