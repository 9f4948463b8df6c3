#include "rslookback/ham.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "rslookback/bs_lookback.hpp"
#include "rslookback/errors.hpp"
#include "rslookback/green.hpp"

namespace rslookback {

void validate_numerics(const NumericsConfig& c) {
    if (c.order_max < 0) {
        throw ValidationError("order_max: must be nonnegative");
    }
    if (c.n_tau < 2) {
        throw ValidationError("n_tau: need at least 2 nodes");
    }
    if (c.n_z < 2) {
        throw ValidationError("n_z: need at least 2 nodes");
    }
    if (c.quad_nodes < 1 || c.n_panels_u < 1 || c.n_panels_xi < 1) {
        throw ValidationError("quadrature counts must be at least 1");
    }
    if (!(c.series_tol > 0.0)) {
        throw ValidationError("series_tol: must be positive");
    }
    if (!(c.z_max_sigmas >= 4.0) || !std::isfinite(c.z_max_sigmas)) {
        throw ValidationError("z_max_sigmas: must be at least 4");
    }
}

double truncated_z_max(double z_cover, double tau, const ValidatedModel& model,
                       double z_max_sigmas) {
    const double sig = model.sigma_max();
    return z_cover + z_max_sigmas * sig * std::sqrt(tau) + tau * (model.r_max() + 0.5 * sig * sig);
}

// --- TermAxes ----------------------------------------------------------------

TermAxes::TermAxes(double tau_max, double z_max, std::size_t n_tau, std::size_t n_z)
    : tau_max_(tau_max),
      s_axis_(0.0, std::sqrt(tau_max), n_tau),
      z_axis_(0.0, z_max, n_z),
      tau_nodes_(n_tau) {
    for (std::size_t j = 0; j < n_tau; ++j) {
        const double s = s_axis_.nodes()[j];
        tau_nodes_[j] = s * s;
    }
    tau_nodes_.front() = 0.0;
    tau_nodes_.back() = tau_max;
}

double TermAxes::interpolate(std::span<const double> values, double tau, double z) const {
    const std::size_t nt = n_tau();
    const std::size_t nz = n_z();
    std::vector<double> column(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        column[j] = z_axis_.interpolate(z, values.subspan(j * nz, nz));
    }
    return s_axis_.interpolate(std::sqrt(std::max(tau, 0.0)), column);
}

double TermGrid::at(double tau, double z) const {
    return closed_form ? u0(z, tau, *closed_form) : axes->interpolate(values, tau, z);
}

bool TermGrid::is_zero() const noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

TermGrid initial_term(Regime regime, const ValidatedModel& model,
                      std::shared_ptr<const TermAxes> axes) {
    TermGrid g;
    g.m = 0;
    g.regime = regime;
    g.values.resize(axes->size());
    const auto& params = model.regime(regime);
    const auto& taus = axes->tau_nodes();
    const auto& zs = axes->z_nodes();
    for (std::size_t j = 0; j < taus.size(); ++j) {
        for (std::size_t k = 0; k < zs.size(); ++k) {
            g.values[j * zs.size() + k] = u0(zs[k], taus[j], params);
        }
    }
    g.axes = std::move(axes);
    g.closed_form = params;
    return g;
}

// --- SourceTerm --------------------------------------------------------------

SourceTerm::SourceTerm(int m, const TermGrid& prev1, const TermGrid& prev2, Regime regime,
                       const ValidatedModel& model)
    : own_(regime == Regime::One ? &prev1 : &prev2),
      other_(regime == Regime::One ? &prev2 : &prev1),
      lambda_(model.exit_intensity(regime)),
      sigma_(model.regime(regime).sigma),
      kappa_(kappa_of(model.regime(regime))),
      vanishes_(false) {
    if (m < 1 || prev1.m != m - 1 || prev2.m != m - 1) {
        throw std::logic_error("SourceTerm: previous terms must be of order m-1");
    }
    vanishes_ = lambda_ == 0.0 || own_->values == other_->values;
}

double SourceTerm::operator()(double u, double xi) const {
    if (vanishes_) {
        return 0.0;
    }
    const double diff = other_->at(u, xi) - own_->at(u, xi);
    return lambda_ * std::exp(0.5 * sigma_ * sigma_ * kappa_ * kappa_ * u - kappa_ * xi) * diff;
}

// --- GreenPropagator ---------------------------------------------------------

struct GreenPropagator::Scratch {
    explicit Scratch(const TermAxes& ax)
        : basis_s(ax.n_tau()), moments(ax.n_z()), row_coeff(ax.size()) {}

    std::vector<double> basis_s;
    std::vector<double> moments;
    std::vector<double> row_coeff;   // [tau node][Chebyshev degree in z]
    std::vector<double> x;
    std::vector<double> kv;
    std::vector<double> t_prev;
    std::vector<double> t_cur;
    QuadratureRule xi_rule;
};

namespace {

// Maps Lobatto-node values to Chebyshev coefficients: f = sum_n c_n T_n, c_n = sum_q C[n][q] f_q.
std::vector<double> lobatto_to_chebyshev(std::size_t n) {
    std::vector<double> c(n * n);
    const double last = static_cast<double>(n - 1);
    for (std::size_t deg = 0; deg < n; ++deg) {
        const double end_deg = (deg == 0 || deg == n - 1) ? 0.5 : 1.0;
        const double sign = (deg % 2 == 0) ? 1.0 : -1.0;   // nodes run from -1 to 1
        for (std::size_t q = 0; q < n; ++q) {
            const double end_q = (q == 0 || q == n - 1) ? 0.5 : 1.0;
            c[deg * n + q] = 2.0 / last * end_deg * end_q * sign *
                             std::cos(std::numbers::pi * static_cast<double>(deg * q) / last);
        }
    }
    return c;
}

}  // namespace

GreenPropagator::GreenPropagator(const RegimeParams& regime, std::shared_ptr<const TermAxes> axes,
                                 const NumericsConfig& config, Execution exec)
    : regime_(regime),
      axes_(std::move(axes)),
      config_(config),
      gl_(static_cast<std::size_t>(config.quad_nodes)),
      z_coeff_(lobatto_to_chebyshev(axes_->n_z())) {
    const auto n_u = static_cast<std::size_t>(config_.n_panels_u);
    const std::vector<double> edges = graded_edges(0.0, 0.5 * std::numbers::pi, n_u, n_u);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        theta_rule_.add_panel(gl_, edges[p], edges[p + 1]);
    }

    const std::size_t n = axes_->size();
    weights_.assign(n * n, 0.0);
    // Rows of the tau = 0 slice stay zero: the time integral is empty.
    const auto first = static_cast<std::ptrdiff_t>(axes_->n_z());
    const auto last = static_cast<std::ptrdiff_t>(n);
    if (exec == Execution::Parallel) {
#pragma omp parallel
        {
            Scratch scratch(*axes_);
#pragma omp for schedule(dynamic, 4)
            for (std::ptrdiff_t node = first; node < last; ++node) {
                build_row(static_cast<std::size_t>(node), scratch);
            }
        }
    } else {
        Scratch scratch(*axes_);
        for (std::ptrdiff_t node = first; node < last; ++node) {
            build_row(static_cast<std::size_t>(node), scratch);
        }
    }
    for (double w : weights_) {
        if (!std::isfinite(w)) {
            throw NumericalError("GreenPropagator: non-finite quadrature weight");
        }
    }
}

void GreenPropagator::build_row(std::size_t node, Scratch& sc) {
    const TermAxes& ax = *axes_;
    const std::size_t nz = ax.n_z();
    const std::size_t nt = ax.n_tau();
    const double tau = ax.tau_nodes()[node / nz];
    const double z = ax.z_nodes()[node % nz];
    const double z_max = ax.z_max();
    const double sigma = regime_.sigma;
    const double kappa = kappa_of(regime_);
    const double root_tau = std::sqrt(tau);
    const auto n_xi = static_cast<std::size_t>(config_.n_panels_xi);

    std::fill(sc.row_coeff.begin(), sc.row_coeff.end(), 0.0);
    for (std::size_t a = 0; a < theta_rule_.x.size(); ++a) {
        const double theta = theta_rule_.x[a];
        const double sin_t = std::sin(theta);
        const double cos_t = std::cos(theta);
        const double t = tau * cos_t * cos_t;   // tau - u, without cancellation
        if (!(t > 0.0)) {
            continue;
        }
        const double du = theta_rule_.w[a] * 2.0 * tau * sin_t * cos_t;

        const double half = config_.z_max_sigmas * sigma * std::sqrt(t) + kappa * sigma * sigma * t;
        const double lo = std::max(0.0, z - half);
        const double hi = std::min(z_max, z + half);
        if (!(hi > lo)) {
            continue;
        }
        sc.xi_rule.clear();
        const std::vector<double> xi_edges = uniform_edges(lo, hi, n_xi);
        for (std::size_t p = 0; p + 1 < xi_edges.size(); ++p) {
            sc.xi_rule.add_panel(gl_, xi_edges[p], xi_edges[p + 1]);
        }
        const std::size_t nb = sc.xi_rule.x.size();
        sc.x.resize(nb);
        sc.kv.resize(nb);
        sc.t_prev.assign(nb, 1.0);
        sc.t_cur.resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            const double xi = sc.xi_rule.x[b];
            sc.kv[b] = sc.xi_rule.w[b] * drift_green_kernel(t, z, xi, sigma, kappa);
            sc.x[b] = 2.0 * xi / z_max - 1.0;
            sc.t_cur[b] = sc.x[b];
        }
        // Chebyshev moments of the weighted kernel: m_n = sum_b kv_b T_n(x_b).
        double m0 = 0.0;
        double m1 = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            m0 += sc.kv[b];
            m1 += sc.kv[b] * sc.x[b];
        }
        sc.moments[0] = m0;
        sc.moments[1] = m1;
        double* tp = sc.t_prev.data();
        double* tc = sc.t_cur.data();
        const double* xs = sc.x.data();
        const double* kvs = sc.kv.data();
        for (std::size_t deg = 2; deg < nz; ++deg) {
            double acc = 0.0;
#pragma omp simd reduction(+ : acc)
            for (std::size_t b = 0; b < nb; ++b) {
                const double next = 2.0 * xs[b] * tc[b] - tp[b];
                tp[b] = tc[b];
                tc[b] = next;
                acc += kvs[b] * next;
            }
            sc.moments[deg] = acc;
        }

        ax.s_axis().basis(root_tau * sin_t, sc.basis_s);
        for (std::size_t jj = 0; jj < nt; ++jj) {
            const double coef = du * sc.basis_s[jj];
            if (coef == 0.0) {
                continue;
            }
            double* dst = sc.row_coeff.data() + jj * nz;
            for (std::size_t deg = 0; deg < nz; ++deg) {
                dst[deg] += coef * sc.moments[deg];
            }
        }
    }

    double* row = weights_.data() + node * ax.size();
    for (std::size_t jj = 0; jj < nt; ++jj) {
        const double* coeff = sc.row_coeff.data() + jj * nz;
        for (std::size_t q = 0; q < nz; ++q) {
            double acc = 0.0;
            for (std::size_t deg = 0; deg < nz; ++deg) {
                acc += coeff[deg] * z_coeff_[deg * nz + q];
            }
            row[jj * nz + q] = acc;
        }
    }
}

std::vector<double> GreenPropagator::apply(std::span<const double> difference) const {
    const std::size_t n = axes_->size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* w = weights_.data() + i * n;
        double acc = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            acc += w[q] * difference[q];
        }
        out[i] = acc;
    }
    return out;
}

std::span<const double> GreenPropagator::row(std::size_t tau_index, std::size_t z_index) const {
    const std::size_t n = axes_->size();
    return {weights_.data() + (tau_index * axes_->n_z() + z_index) * n, n};
}

// --- PropagatorCache ---------------------------------------------------------

std::shared_ptr<const GreenPropagator> PropagatorCache::get(const RegimeParams& regime,
                                                            std::shared_ptr<const TermAxes> axes,
                                                            const NumericsConfig& config,
                                                            Execution exec) {
    const Key key{regime.r,          regime.sigma,       axes->tau_max(),   axes->z_max(),
                  axes->n_tau(),     axes->n_z(),        config.quad_nodes, config.n_panels_u,
                  config.n_panels_xi, config.z_max_sigmas};
    {
        std::lock_guard lock(mutex_);
        if (auto it = entries_.find(key); it != entries_.end()) {
            return it->second;
        }
    }
    auto built = std::make_shared<const GreenPropagator>(regime, std::move(axes), config, exec);
    std::lock_guard lock(mutex_);
    return entries_.emplace(key, std::move(built)).first->second;
}

std::size_t PropagatorCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

// --- Series ------------------------------------------------------------------

std::array<TermGrid, 2> compute_term(int m, const TermGrid& prev1, const TermGrid& prev2,
                                     const ValidatedModel& model, const NumericsConfig& config,
                                     PropagatorCache& cache, Execution exec) {
    if (m < 1 || prev1.m != m - 1 || prev2.m != m - 1) {
        throw std::logic_error("compute_term: previous terms must be of order m-1");
    }
    if (!(*prev1.axes == *prev2.axes)) {
        throw std::logic_error("compute_term: previous terms live on different axes");
    }
    std::array<TermGrid, 2> out;
    for (Regime i : {Regime::One, Regime::Two}) {
        const TermGrid& own = i == Regime::One ? prev1 : prev2;
        const TermGrid& oth = i == Regime::One ? prev2 : prev1;
        TermGrid& g = out[index_of(i)];
        g.m = m;
        g.regime = i;
        g.axes = own.axes;
        g.values.assign(own.axes->size(), 0.0);

        const double lambda = model.exit_intensity(i);
        std::vector<double> diff(own.values.size());
        bool all_zero = true;
        for (std::size_t q = 0; q < diff.size(); ++q) {
            diff[q] = oth.values[q] - own.values[q];
            all_zero = all_zero && diff[q] == 0.0;
        }
        if (lambda == 0.0 || all_zero) {
            continue;
        }
        const auto prop = cache.get(model.regime(i), own.axes, config, exec);
        g.values = prop->apply(diff);
        for (double& v : g.values) {
            v *= lambda;
            if (!std::isfinite(v)) {
                throw NumericalError("compute_term: non-finite term value at order " +
                                     std::to_string(m));
            }
        }
    }
    return out;
}

SeriesSum sum_series(std::span<const std::array<TermGrid, 2>> terms, double tau, double z,
                     const NumericsConfig& config) {
    SeriesSum out;
    double factorial = 1.0;
    for (std::size_t m = 0; m < terms.size(); ++m) {
        if (m > 0) {
            factorial *= static_cast<double>(m);
        }
        const double scale =
            config.normalization_mode == NormalizationMode::AsStated ? 1.0 / factorial : 1.0;
        for (int i = 0; i < 2; ++i) {
            const TermGrid& g = terms[m][static_cast<std::size_t>(i)];
            const double c = g.is_zero() ? 0.0 : scale * g.at(tau, z);
            out.reduced_value[static_cast<std::size_t>(i)] += c;
            out.term_magnitudes[static_cast<std::size_t>(i)].push_back(std::abs(c));
        }
    }
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& mags = out.term_magnitudes[i];
        out.converged[i] = mags.empty() || terms.size() == 1 ||
                           mags.back() <= config.series_tol * std::abs(out.reduced_value[i]);
    }
    return out;
}

// --- HamEngine ---------------------------------------------------------------

HamEngine::HamEngine(const ValidatedModel& model, const NumericsConfig& config, double tau_max,
                     double z_cover, PropagatorCache* cache, Execution exec)
    : model_(model), config_(config), z_cover_(z_cover) {
    validate_numerics(config);
    if (!(tau_max > 0.0) || !std::isfinite(tau_max)) {
        throw ValidationError("tau: time to expiry must be positive");
    }
    if (!(z_cover >= 0.0) || !std::isfinite(z_cover)) {
        throw ValidationError("z: log max ratio must be nonnegative");
    }
    const double z_max = truncated_z_max(z_cover, tau_max, model, config.z_max_sigmas);
    axes_ = std::make_shared<const TermAxes>(tau_max, z_max, static_cast<std::size_t>(config.n_tau),
                                             static_cast<std::size_t>(config.n_z));
    PropagatorCache local;
    PropagatorCache& props = cache ? *cache : local;
    terms_.reserve(static_cast<std::size_t>(config.order_max) + 1);
    terms_.push_back({initial_term(Regime::One, model, axes_),
                      initial_term(Regime::Two, model, axes_)});
    for (int m = 1; m <= config.order_max; ++m) {
        const auto& prev = terms_.back();
        terms_.push_back(compute_term(m, prev[0], prev[1], model, config, props, exec));
    }
}

SeriesSum HamEngine::evaluate(double tau, double z, int order) const {
    const std::size_t count =
        order < 0 ? terms_.size()
                  : std::min(terms_.size(), static_cast<std::size_t>(order) + 1);
    return sum_series(std::span(terms_).first(count), tau, z, config_);
}

std::vector<double> HamEngine::summed_grid(Regime regime, int order) const {
    const std::size_t count =
        order < 0 ? terms_.size()
                  : std::min(terms_.size(), static_cast<std::size_t>(order) + 1);
    std::vector<double> out(axes_->size(), 0.0);
    double factorial = 1.0;
    for (std::size_t m = 0; m < count; ++m) {
        if (m > 0) {
            factorial *= static_cast<double>(m);
        }
        const double scale =
            config_.normalization_mode == NormalizationMode::AsStated ? 1.0 / factorial : 1.0;
        const auto& v = terms_[m][static_cast<std::size_t>(index_of(regime))].values;
        for (std::size_t q = 0; q < out.size(); ++q) {
            out[q] += scale * v[q];
        }
    }
    return out;
}

PriceReport HamEngine::price(const LookbackQuery& query) const {
    validate_query(query);
    const ReducedCoordinates rc = reduce(query, model_);
    if (rc.tau > axes_->tau_max() || rc.z > z_cover_) {
        throw ValidationError("query lies outside the engine's (tau, z) domain");
    }
    const SeriesSum sum = evaluate(rc.tau, rc.z);
    const auto i = static_cast<std::size_t>(index_of(query.regime));
    PriceReport rep;
    rep.reduced_value = sum.reduced_value[i];
    rep.price = query.s * rep.reduced_value;
    rep.term_magnitudes = sum.term_magnitudes[i];
    rep.truncation_estimate = rep.term_magnitudes.empty() ? 0.0 : rep.term_magnitudes.back();
    rep.config_echo = config_;
    rep.converged = sum.converged[i];
    if (!rep.converged) {
        rep.warnings.push_back("series not converged: last term exceeds series_tol * |U|");
    }
    if (!std::isfinite(rep.price)) {
        throw NumericalError("ham: non-finite price");
    }
    return rep;
}

PriceReport price_floating(const LookbackQuery& query, const ValidatedModel& model,
                           const NumericsConfig& config, PropagatorCache* cache) {
    validate_query(query);
    const ReducedCoordinates rc = reduce(query, model);
    const HamEngine engine(model, config, rc.tau, rc.z, cache);
    return engine.price(query);
}

double parity_adjustment(const LookbackQuery& query, const ValidatedModel& model,
                         ParityMode mode) {
    const double discounted =
        query.strike * std::exp(-model.regime(query.regime).r * (query.T - query.t));
    return mode == ParityMode::AsStated ? discounted : query.s - discounted;
}

PriceReport price_fixed(const LookbackQuery& query, const ValidatedModel& model,
                        const NumericsConfig& config, PropagatorCache* cache) {
    if (query.style != OptionStyle::FixedStrikeCall) {
        throw ValidationError("style: price_fixed needs a fixed-strike call query");
    }
    PriceReport rep = price_floating(query, model, config, cache);
    rep.price += parity_adjustment(query, model, config.parity_mode);
    return rep;
}

}  // namespace rslookback
