#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "genfrac/cli/commands.hpp"

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("genfrac");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("GENFRAC_LOG"))
        spdlog::cfg::helpers::load_levels(level);
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Generalized fractional operators: evaluation, checks, norms and the integral-equation solver"};
    app.set_version_flag("--version", std::string(genfrac::version));
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_path;
    std::string format = "csv";
    unsigned threads = 1;
    genfrac::cli::Overrides overrides;
    std::optional<std::string> variant;
    std::optional<std::string> suite;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON job file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out_path, "output file (default: stdout)");
        cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--threads", threads, "worker threads, 0 = all cores");
        cmd->add_option("--seed", overrides.seed, "seed for random audits");
        cmd->add_option("--alpha", overrides.alpha, "order alpha as 're' or 're,im'");
        cmd->add_option("--beta", overrides.beta, "order beta as 're' or 're,im'");
        cmd->add_option("--chart", overrides.chart, "chart preset name");
        cmd->add_option("--kernel", overrides.kernel, "kernel preset name");
    };
    CLI::App* eval = app.add_subcommand("eval", "series and quadrature values of an operator on a grid");
    add_common(eval);
    eval->add_option("--variant", variant, "integral, rl_derivative or caputo_derivative");
    CLI::App* check = app.add_subcommand("check", "run a property or audit suite");
    add_common(check);
    check->add_option("--suite", suite, "semigroup, commutativity, mfold, bounds or derivative_bounds");
    CLI::App* solve = app.add_subcommand("solve", "solve the model integral equation");
    add_common(solve);
    CLI::App* norm = app.add_subcommand("norm", "weighted norm of a function");
    add_common(norm);

    CLI11_PARSE(app, argc, argv);

    genfrac::cli::CommandResult result;
    try {
        const auto config = genfrac::cli::load_config_file(config_path);
        const genfrac::cli::RunOptions opt{format == "json" ? genfrac::cli::Format::json : genfrac::cli::Format::csv,
                                           threads, overrides};
        spdlog::debug("config {} digest {}", config_path, genfrac::cli::config_digest(config));
        if (eval->parsed())
            result = genfrac::cli::cmd_eval(config, opt, variant);
        else if (check->parsed())
            result = genfrac::cli::cmd_check(config, opt, suite);
        else if (solve->parsed())
            result = genfrac::cli::cmd_solve(config, opt);
        else
            result = genfrac::cli::cmd_norm(config, opt);
    } catch (const genfrac::Error& err) {
        result = {genfrac::cli::exit_validation, "", err.what()};
    }

    if (!result.diagnostic.empty()) {
        if (result.exit_code == genfrac::cli::exit_check_failed)
            spdlog::warn("{}", result.diagnostic);
        else
            spdlog::error("{}", result.diagnostic);
    }
    if (!result.output.empty()) {
        if (out_path) {
            std::ofstream out(*out_path);
            if (!out) {
                spdlog::error("cannot write '{}'", *out_path);
                return genfrac::cli::exit_validation;
            }
            out << result.output;
            spdlog::info("wrote {}", *out_path);
        } else {
            std::cout << result.output;
        }
    }
    return result.exit_code;
}
