#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rslookback/cli.hpp"

namespace cli = rslookback::cli;

namespace {

struct Options {
    std::string config_path;
    std::string engine = "ham";
    int max_order = 0;
    std::string sweep;
    std::string values;
    std::string output;
    std::optional<unsigned long long> seed;
};

int dispatch(const std::string& command, const Options& opt) {
    cli::RunConfig config = cli::parse_config_file(opt.config_path);
    if (opt.seed) {
        config.mc.seed = *opt.seed;
    }
    if (!opt.output.empty()) {
        config.output_path = opt.output;
    }
    std::ostringstream buffer;
    int code = cli::kExitOk;
    if (command == "price") {
        code = cli::cmd_price(config, cli::parse_engine(opt.engine), buffer);
    } else if (command == "converge") {
        code = cli::cmd_converge(config, opt.max_order, buffer);
    } else if (command == "validate") {
        code = cli::cmd_validate(config, buffer, std::cerr);
    } else {
        code = cli::cmd_table(config, opt.sweep, cli::parse_values(opt.values), buffer);
    }
    if (config.output_path) {
        std::ofstream file(*config.output_path, std::ios::binary);
        if (!file) {
            throw rslookback::ValidationError("cannot open output file '" + *config.output_path + "'");
        }
        file << buffer.str();
    } else {
        std::cout << buffer.str();
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lookback option pricing under two-state regime switching"};
    app.footer(cli::defaults_table());
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "Config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--output", opt.output, "Write results to FILE instead of standard output");
        sub->add_option("--seed", opt.seed, "Override mc.seed");
    };
    auto* price = app.add_subcommand("price", "Price the configured query with one engine");
    add_common(price);
    price->add_option("--engine", opt.engine, "ham | mc | fd")
        ->check(CLI::IsMember({"ham", "mc", "fd"}))
        ->capture_default_str();
    auto* converge = app.add_subcommand("converge", "Partial sums per series order (CSV)");
    add_common(converge);
    converge->add_option("--max-order", opt.max_order, "Highest order M")->required();
    auto* validate = app.add_subcommand("validate", "Cross-check ham against mc and fd (CSV)");
    add_common(validate);
    auto* table = app.add_subcommand("table", "HAM prices over a parameter sweep (CSV)");
    add_common(table);
    table->add_option("--sweep", opt.sweep, "s | y | T | sigma1 | sigma2 | lambda12 | lambda21")->required();
    table->add_option("--values", opt.values, "Comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return cli::run_guarded([&] { return dispatch(command, opt); }, std::cerr);
}
