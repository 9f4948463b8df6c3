#include "rslookback/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace rslookback::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ValidationError(std::string(what) + ": cannot parse '" + std::string(text) + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) {
            throw ValidationError(std::string(what) + ": value must be finite");
        }
    }
    return value;
}

std::string exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

template <class T>
std::string integer(T v) {
    return std::to_string(v);
}

bool parse_bool(std::string_view text, std::string_view what) {
    if (text == "true") {
        return true;
    }
    if (text == "false") {
        return false;
    }
    throw ValidationError(std::string(what) + ": expected true or false");
}

using Setter = std::function<void(RunConfig&, std::string_view)>;
using Getter = std::function<std::optional<std::string>(const RunConfig&)>;

struct Field {
    std::string section;
    std::string key;
    bool required;
    Setter set;
    Getter get;
    std::string default_text;
    std::string help;
};

template <class Member>
Field number_field(std::string section, std::string key, bool required, Member member,
                   std::string help) {
    using T = std::remove_cvref_t<decltype(std::invoke(member, std::declval<RunConfig&>()))>;
    const std::string what = section + "." + key;
    Field f{section, key, required,
            [member, what](RunConfig& c, std::string_view v) {
                std::invoke(member, c) = parse_number<T>(v, what);
            },
            [member](const RunConfig& c) -> std::optional<std::string> {
                if constexpr (std::is_floating_point_v<T>) {
                    return exact(std::invoke(member, c));
                } else {
                    return integer(std::invoke(member, c));
                }
            },
            {}, std::move(help)};
    if (!required) {
        f.default_text = *f.get(RunConfig{});
    }
    return f;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> t;
        auto model = [](double RegimeParams::*p, int regime) {
            return [p, regime](auto& c) -> auto& {
                if (regime == 1) {
                    return c.model.regime1.*p;
                }
                return c.model.regime2.*p;
            };
        };
        auto mu_field = [](int regime) {
            const std::string key = "mu" + std::to_string(regime);
            auto slot = [regime](auto& c) -> auto& {
                return regime == 1 ? c.model.regime1.mu : c.model.regime2.mu;
            };
            return Field{"model", key, false,
                         [slot, key](RunConfig& c, std::string_view v) {
                             slot(c) = parse_number<double>(v, "model." + key);
                         },
                         [slot](const RunConfig& c) -> std::optional<std::string> {
                             const auto& mu = slot(c);
                             return mu ? std::optional(exact(*mu)) : std::nullopt;
                         },
                         "unset", "real-world drift, Esscher report only"};
        };
        t.push_back(number_field("model", "r1", true, model(&RegimeParams::r, 1), "rate, regime 1"));
        t.push_back(number_field("model", "sigma1", true, model(&RegimeParams::sigma, 1), "volatility, regime 1"));
        t.push_back(mu_field(1));
        t.push_back(number_field("model", "r2", true, model(&RegimeParams::r, 2), "rate, regime 2"));
        t.push_back(number_field("model", "sigma2", true, model(&RegimeParams::sigma, 2), "volatility, regime 2"));
        t.push_back(mu_field(2));
        t.push_back(number_field("model", "lambda12", true, [](auto& c) -> auto& { return c.model.lambda12; }, "intensity 1 -> 2"));
        t.push_back(number_field("model", "lambda21", true, [](auto& c) -> auto& { return c.model.lambda21; }, "intensity 2 -> 1"));

        t.push_back(number_field("query", "s", true, [](auto& c) -> auto& { return c.query.s; }, "spot"));
        t.push_back(number_field("query", "y", true, [](auto& c) -> auto& { return c.query.y; }, "running maximum"));
        t.push_back(number_field("query", "t", false, [](auto& c) -> auto& { return c.query.t; }, "valuation time"));
        t.push_back(number_field("query", "T", true, [](auto& c) -> auto& { return c.query.T; }, "expiry"));
        t.push_back(Field{"query", "regime", false,
                          [](RunConfig& c, std::string_view v) {
                              const int r = parse_number<int>(v, "query.regime");
                              if (r != 1 && r != 2) {
                                  throw ValidationError("query.regime: must be 1 or 2");
                              }
                              c.query.regime = static_cast<Regime>(r);
                          },
                          [](const RunConfig& c) -> std::optional<std::string> {
                              return std::to_string(static_cast<int>(c.query.regime));
                          },
                          "1", "current regime"});
        t.push_back(Field{"query", "style", false,
                          [](RunConfig& c, std::string_view v) {
                              if (v == "floating_put") {
                                  c.query.style = OptionStyle::FloatingStrikePut;
                              } else if (v == "fixed_call") {
                                  c.query.style = OptionStyle::FixedStrikeCall;
                              } else {
                                  throw ValidationError("query.style: expected floating_put or fixed_call");
                              }
                          },
                          [](const RunConfig& c) -> std::optional<std::string> {
                              return c.query.style == OptionStyle::FloatingStrikePut ? "floating_put"
                                                                                     : "fixed_call";
                          },
                          "floating_put", "floating_put | fixed_call"});
        t.push_back(number_field("query", "strike", false, [](auto& c) -> auto& { return c.query.strike; }, "fixed-strike K"));

        auto num = [](auto p) { return [p](auto& c) -> auto& { return c.numerics.*p; }; };
        t.push_back(number_field("numerics", "order_max", false, num(&NumericsConfig::order_max), "series order M"));
        t.push_back(number_field("numerics", "n_tau", false, num(&NumericsConfig::n_tau), "Chebyshev nodes in sqrt(tau)"));
        t.push_back(number_field("numerics", "n_z", false, num(&NumericsConfig::n_z), "Chebyshev nodes in z"));
        t.push_back(number_field("numerics", "z_max_sigmas", false, num(&NumericsConfig::z_max_sigmas), "domain cut c"));
        t.push_back(number_field("numerics", "quad_nodes", false, num(&NumericsConfig::quad_nodes), "Gauss-Legendre nodes per panel"));
        t.push_back(number_field("numerics", "n_panels_u", false, num(&NumericsConfig::n_panels_u), "time panels"));
        t.push_back(number_field("numerics", "n_panels_xi", false, num(&NumericsConfig::n_panels_xi), "xi panels"));
        t.push_back(number_field("numerics", "series_tol", false, num(&NumericsConfig::series_tol), "relative tail tolerance"));
        t.push_back(Field{"numerics", "normalization_mode", false,
                          [](RunConfig& c, std::string_view v) {
                              if (v == "plain_sum") {
                                  c.numerics.normalization_mode = NormalizationMode::PlainSum;
                              } else if (v == "as_stated") {
                                  c.numerics.normalization_mode = NormalizationMode::AsStated;
                              } else {
                                  throw ValidationError("numerics.normalization_mode: expected plain_sum or as_stated");
                              }
                          },
                          [](const RunConfig& c) -> std::optional<std::string> {
                              return c.numerics.normalization_mode == NormalizationMode::PlainSum
                                         ? "plain_sum" : "as_stated";
                          },
                          "plain_sum", "plain_sum | as_stated (1/m! weights)"});
        t.push_back(Field{"numerics", "parity_mode", false,
                          [](RunConfig& c, std::string_view v) {
                              if (v == "as_stated") {
                                  c.numerics.parity_mode = ParityMode::AsStated;
                              } else if (v == "standard") {
                                  c.numerics.parity_mode = ParityMode::Standard;
                              } else {
                                  throw ValidationError("numerics.parity_mode: expected as_stated or standard");
                              }
                          },
                          [](const RunConfig& c) -> std::optional<std::string> {
                              return c.numerics.parity_mode == ParityMode::AsStated ? "as_stated"
                                                                                    : "standard";
                          },
                          "as_stated", "as_stated (V + K e^-r tau) | standard (V + s - K e^-r tau)"});

        t.push_back(number_field("mc", "n_paths", false, [](auto& c) -> auto& { return c.mc.n_paths; }, "paths"));
        t.push_back(number_field("mc", "seed", false, [](auto& c) -> auto& { return c.mc.seed; }, "stream seed"));
        t.push_back(number_field("mc", "steps_per_year", false, [](auto& c) -> auto& { return c.mc.steps_per_year; }, "bridge sub-steps per year"));
        t.push_back(Field{"mc", "bridge", false,
                          [](RunConfig& c, std::string_view v) { c.mc.bridge = parse_bool(v, "mc.bridge"); },
                          [](const RunConfig& c) -> std::optional<std::string> {
                              return c.mc.bridge ? "true" : "false";
                          },
                          "true", "Brownian-bridge maxima"});

        t.push_back(number_field("fd", "n_tau", false, [](auto& c) -> auto& { return c.fd.n_tau; }, "time steps"));
        t.push_back(number_field("fd", "n_z", false, [](auto& c) -> auto& { return c.fd.n_z; }, "space intervals"));
        t.push_back(number_field("fd", "z_max", false, [](auto& c) -> auto& { return c.fd.z_max; }, "0 = z + 8 sigma_max sqrt(tau) + tau (r_max + sigma_max^2/2)"));

        t.push_back(Field{"output", "format", false,
                          [](RunConfig& c, std::string_view v) {
                              if (v == "text") {
                                  c.format = OutputFormat::Text;
                              } else if (v == "csv") {
                                  c.format = OutputFormat::Csv;
                              } else {
                                  throw ValidationError("output.format: expected text or csv");
                              }
                          },
                          [](const RunConfig& c) -> std::optional<std::string> {
                              return c.format == OutputFormat::Text ? "text" : "csv";
                          },
                          "text", "text | csv"});
        t.push_back(Field{"output", "path", false,
                          [](RunConfig& c, std::string_view v) { c.output_path = std::string(v); },
                          [](const RunConfig& c) { return c.output_path; },
                          "stdout", "output file"});
        return t;
    }();
    return table;
}

const std::vector<std::string>& section_order() {
    static const std::vector<std::string> order{"model", "query", "numerics", "mc", "fd", "output"};
    return order;
}

std::string_view style_name(OptionStyle s) {
    return s == OptionStyle::FloatingStrikePut ? "floating_put" : "fixed_call";
}

std::string_view engine_name(Engine e) {
    switch (e) {
    case Engine::Ham: return "ham";
    case Engine::Mc: return "mc";
    case Engine::Fd: return "fd";
    }
    return "?";
}

// Adds the parity leg for fixed-strike queries; engines other than ham price the floating put.
double style_adjustment(const RunConfig& c, const ValidatedModel& model) {
    return c.query.style == OptionStyle::FixedStrikeCall
               ? parity_adjustment(c.query, model, c.numerics.parity_mode)
               : 0.0;
}

PriceReport ham_report(const RunConfig& c, const ValidatedModel& model, PropagatorCache* cache) {
    return c.query.style == OptionStyle::FixedStrikeCall
               ? price_fixed(c.query, model, c.numerics, cache)
               : price_floating(c.query, model, c.numerics, cache);
}

void write_echo(const RunConfig& c, std::ostream& out) {
    out << "\n# config echo\n" << serialize_config(c);
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
    return {buf, res.ptr};
}

RunConfig parse_config(std::istream& in, std::string_view source) {
    RunConfig c;
    std::string section;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = trim(text);
        if (text.empty()) {
            continue;
        }
        if (text.front() == '[') {
            if (text.back() != ']') {
                fail("malformed section header");
            }
            section = std::string(trim(text.substr(1, text.size() - 2)));
            const auto& order = section_order();
            if (std::find(order.begin(), order.end(), section) == order.end()) {
                fail("unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            fail("expected key = value");
        }
        if (section.empty()) {
            fail("key outside of a section");
        }
        const std::string key(trim(text.substr(0, eq)));
        const std::string_view value = trim(text.substr(eq + 1));
        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
            return f.section == section && f.key == key;
        });
        if (it == table.end()) {
            fail("unknown key '" + key + "' in [" + section + "]");
        }
        if (!seen.emplace(section, key).second) {
            fail("duplicate key '" + key + "'");
        }
        try {
            it->set(c, value);
        } catch (const ValidationError& e) {
            fail(e.what());
        }
    }
    for (const Field& f : fields()) {
        if (f.required && !seen.contains({f.section, f.key})) {
            throw ConfigError(std::string(source) + ": missing required key " + f.section + "." + f.key);
        }
    }
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open config file '" + path + "'");
    }
    return parse_config(in, path);
}

std::string serialize_config(const RunConfig& config) {
    std::ostringstream out;
    for (const std::string& section : section_order()) {
        out << '[' << section << "]\n";
        for (const Field& f : fields()) {
            if (f.section != section) {
                continue;
            }
            if (const auto v = f.get(config)) {
                out << f.key << " = " << *v << '\n';
            }
        }
    }
    return out.str();
}

std::string defaults_table() {
    std::ostringstream out;
    out << "Config keys and defaults (required keys have no default):\n";
    for (const Field& f : fields()) {
        std::string name = f.section + "." + f.key;
        name.resize(std::max<std::size_t>(name.size() + 1, 28), ' ');
        std::string def = f.required ? "(required)" : f.default_text;
        def.resize(std::max<std::size_t>(def.size() + 1, 14), ' ');
        out << "  " << name << def << f.help << '\n';
    }
    return out.str();
}

Engine parse_engine(std::string_view name) {
    if (name == "ham") {
        return Engine::Ham;
    }
    if (name == "mc") {
        return Engine::Mc;
    }
    if (name == "fd") {
        return Engine::Fd;
    }
    throw ValidationError("engine: expected ham, mc or fd");
}

std::vector<double> parse_values(std::string_view list) {
    std::vector<double> values;
    while (!list.empty()) {
        const auto comma = list.find(',');
        values.push_back(parse_number<double>(trim(list.substr(0, comma)), "values"));
        if (comma == std::string_view::npos) {
            break;
        }
        list.remove_prefix(comma + 1);
    }
    if (values.empty()) {
        throw ValidationError("values: empty list");
    }
    return values;
}

int cmd_price(const RunConfig& config, Engine engine, std::ostream& out) {
    const ValidatedModel model = validate_model(config.model);
    validate_query(config.query);
    validate_numerics(config.numerics);
    const bool csv = config.format == OutputFormat::Csv;
    if (csv) {
        out << "engine,regime,style,price,reduced_value,truncation_estimate,mc_std_error\n";
    } else {
        out << "engine: " << engine_name(engine) << '\n'
            << "regime: " << static_cast<int>(config.query.regime) << '\n'
            << "style: " << style_name(config.query.style) << '\n';
    }
    const double adjust = style_adjustment(config, model);
    const std::string prefix = std::string(engine_name(engine)) + "," +
                               std::to_string(static_cast<int>(config.query.regime)) + "," +
                               std::string(style_name(config.query.style)) + ",";
    switch (engine) {
    case Engine::Ham: {
        const PriceReport rep = ham_report(config, model, nullptr);
        if (csv) {
            out << prefix << format_number(rep.price) << ',' << format_number(rep.reduced_value) << ','
                << format_number(rep.truncation_estimate) << ",\n";
            return kExitOk;
        }
        out << "price: " << format_number(rep.price) << '\n'
            << "reduced_value: " << format_number(rep.reduced_value) << '\n'
            << "truncation_estimate: " << format_number(rep.truncation_estimate) << '\n'
            << "converged: " << (rep.converged ? "yes" : "no") << '\n'
            << "term magnitudes (reduced units):\n";
        for (std::size_t m = 0; m < rep.term_magnitudes.size(); ++m) {
            out << "  order " << m << ": " << format_number(rep.term_magnitudes[m]) << '\n';
        }
        for (const std::string& w : rep.warnings) {
            out << "warning: " << w << '\n';
        }
        break;
    }
    case Engine::Mc: {
        const McEstimate est = mc_price(config.query, model, config.mc);
        const double price = est.mean + adjust;
        if (csv) {
            out << prefix << format_number(price) << ',' << format_number(price / config.query.s)
                << ",," << format_number(est.std_error) << '\n';
            return kExitOk;
        }
        out << "price: " << format_number(price) << '\n'
            << "std_error: " << format_number(est.std_error) << '\n'
            << "n_paths: " << est.n_paths << '\n'
            << "seed: " << est.seed << '\n';
        break;
    }
    case Engine::Fd: {
        const FdResult res = fd_price(config.query, model, config.fd);
        const double price = res.price + adjust;
        if (csv) {
            out << prefix << format_number(price) << ',' << format_number(price / config.query.s)
                << ",,\n";
            return kExitOk;
        }
        out << "price: " << format_number(price) << '\n'
            << "grid: " << res.grid.n_tau() << " x " << res.grid.n_z() << '\n'
            << "z_max: " << format_number(res.grid.z_nodes.back()) << '\n';
        break;
    }
    }
    write_echo(config, out);
    return kExitOk;
}

int cmd_converge(const RunConfig& config, int max_order, std::ostream& out) {
    if (max_order < 0) {
        throw ValidationError("max-order: must be nonnegative");
    }
    const ValidatedModel model = validate_model(config.model);
    validate_query(config.query);
    NumericsConfig numerics = config.numerics;
    numerics.order_max = max_order;
    const ReducedCoordinates rc = reduce(config.query, model);
    const HamEngine engine(model, numerics, rc.tau, rc.z);
    const double s = config.query.s;
    const SeriesSum full = engine.evaluate(rc.tau, rc.z);
    out << "order,price_regime1,price_regime2,last_term_magnitude\n";
    for (int m = 0; m <= max_order; ++m) {
        const SeriesSum sum = engine.evaluate(rc.tau, rc.z, m);
        const auto k = static_cast<std::size_t>(m);
        const double last = std::max(full.term_magnitudes[0][k], full.term_magnitudes[1][k]);
        out << m << ',' << format_number(s * sum.reduced_value[0]) << ','
            << format_number(s * sum.reduced_value[1]) << ',' << format_number(last) << '\n';
    }
    return kExitOk;
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const ValidatedModel model = validate_model(config.model);
    validate_query(config.query);
    validate_numerics(config.numerics);
    const double adjust = style_adjustment(config, model);
    const double ham = ham_report(config, model, nullptr).price;
    const McEstimate mc = mc_price(config.query, model, config.mc);
    const double mc_price_value = mc.mean + adjust;
    const double fd = fd_price(config.query, model, config.fd).price + adjust;

    out << "engine,price,error_vs_ham,mc_std_error\n"
        << "ham," << format_number(ham) << ",0,\n"
        << "mc," << format_number(mc_price_value) << ',' << format_number(mc_price_value - ham) << ','
        << format_number(mc.std_error) << '\n'
        << "fd," << format_number(fd) << ',' << format_number(fd - ham) << ",\n";

    int code = kExitOk;
    if (std::abs(mc_price_value - ham) > 3.0 * mc.std_error) {
        err << "disagreement: mc differs from ham by " << format_number(mc_price_value - ham)
            << " (more than 3 standard errors)\n";
        code = kExitDisagreement;
    }
    if (std::abs(fd - ham) > 5e-3 * std::abs(ham)) {
        err << "disagreement: fd differs from ham by " << format_number(fd - ham)
            << " (more than 5e-3 relative)\n";
        code = kExitDisagreement;
    }
    return code;
}

int cmd_table(const RunConfig& config, std::string_view sweep, const std::vector<double>& values,
              std::ostream& out) {
    static const std::map<std::string_view, std::function<double&(RunConfig&)>> targets{
        {"s", [](RunConfig& c) -> double& { return c.query.s; }},
        {"y", [](RunConfig& c) -> double& { return c.query.y; }},
        {"T", [](RunConfig& c) -> double& { return c.query.T; }},
        {"sigma1", [](RunConfig& c) -> double& { return c.model.regime1.sigma; }},
        {"sigma2", [](RunConfig& c) -> double& { return c.model.regime2.sigma; }},
        {"lambda12", [](RunConfig& c) -> double& { return c.model.lambda12; }},
        {"lambda21", [](RunConfig& c) -> double& { return c.model.lambda21; }},
    };
    const auto target = targets.find(sweep);
    if (target == targets.end()) {
        throw ValidationError("sweep: unknown parameter '" + std::string(sweep) +
                              "' (expected s, y, T, sigma1, sigma2, lambda12 or lambda21)");
    }
    PropagatorCache cache;
    std::vector<std::string> rows;
    for (double v : values) {
        RunConfig c = config;
        target->second(c) = v;
        const ValidatedModel model = validate_model(c.model);
        const PriceReport rep = ham_report(c, model, &cache);
        rows.push_back(format_number(v) + ',' + format_number(rep.price) + ',' +
                       format_number(rep.truncation_estimate));
    }
    out << "sweep_value,price,truncation_estimate\n";
    for (const std::string& r : rows) {
        out << r << '\n';
    }
    return kExitOk;
}

}  // namespace rslookback::cli
