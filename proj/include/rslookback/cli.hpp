#pragma once

#include <exception>
#include <ostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rslookback/errors.hpp"
#include "rslookback/finite_difference.hpp"
#include "rslookback/ham.hpp"
#include "rslookback/model.hpp"
#include "rslookback/monte_carlo.hpp"

namespace rslookback::cli {

enum class OutputFormat { Text, Csv };
enum class Engine { Ham, Mc, Fd };

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitDisagreement = 4;

/// Everything one run needs. Parsed from `[section]` / `key = value` text.
struct RunConfig {
    MarketModel model;
    LookbackQuery query;
    NumericsConfig numerics;
    McConfig mc;
    FdConfig fd;
    OutputFormat format = OutputFormat::Text;
    std::optional<std::string> output_path;

    bool operator==(const RunConfig&) const = default;
};

/// Config text error; the message carries "<source>:<line>: ".
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/**
 * Parses a config. Sections: model, query, numerics, mc, fd, output. `#` starts a
 * comment. Unknown sections or keys, duplicate keys, malformed numbers and missing
 * required keys (model r1 sigma1 r2 sigma2 lambda12 lambda21; query s y T) throw ConfigError.
 * Model and query invariants are checked afterwards by validate_model / validate_query.
 */
RunConfig parse_config(std::istream& in, std::string_view source = "config");
RunConfig parse_config_file(const std::string& path);

/// Canonical text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Help-text table of every default.
std::string defaults_table();

/// Locale-independent, 12 significant digits.
std::string format_number(double value);

Engine parse_engine(std::string_view name);

// Commands write results to `out` and return an exit code; they throw
// ValidationError / NumericalError, which run_guarded maps to 2 / 3.
int cmd_price(const RunConfig& config, Engine engine, std::ostream& out);
int cmd_converge(const RunConfig& config, int max_order, std::ostream& out);
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_table(const RunConfig& config, std::string_view sweep, const std::vector<double>& values,
              std::ostream& out);

/// Comma-separated numbers.
std::vector<double> parse_values(std::string_view list);

/// Runs `body`, printing any exception to `err` and mapping it to an exit code.
template <class F>
int run_guarded(F&& body, std::ostream& err) {
    try {
        return body();
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace rslookback::cli
