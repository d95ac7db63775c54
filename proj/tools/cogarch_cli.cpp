// Command line front-end.  Every subcommand reads one JSON experiment
// config, runs the corresponding experiment, writes a JSON report (plus CSV
// or JSON tables) into the output directory, and exits 0 only if every
// configured verdict passed.
//
// Exit codes: 0 = success / all verdicts pass, 1 = a verdict failed,
// 2 = usage or config error, 3 = numerical failure.
//
// Output directory resolution: --out beats the COGARCH_OUT_DIR environment
// variable, which beats outputs.directory from the config.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <cogarch/experiments.hpp>

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<long> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
};

void add_common_options(CLI::App* sub, CliOptions& opts) {
    sub->add_option("--config", opts.config_path, "Path to the JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Override mc.seed from the config");
    sub->add_option("--workers", opts.workers, "Override mc.workers (0 = all cores)");
    sub->add_option("--out", opts.out_dir, "Output directory (beats COGARCH_OUT_DIR and config)");
    sub->add_option("--format", opts.format, "Table format")
        ->check(CLI::IsMember({"csv", "json"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"COGARCH symbol, extended generator and semimartingale characteristics"};
    app.require_subcommand(1);

    CliOptions opts;
    CLI::App* simulate = app.add_subcommand("simulate", "Sample paths to per-path tables");
    CLI::App* symbol =
        app.add_subcommand("symbol", "Evaluate the closed-form symbol on the configured grid");
    CLI::App* mc_symbol = app.add_subcommand(
        "mc-symbol", "Estimate the probabilistic symbol from stopped increments");
    CLI::App* verify_symbol = app.add_subcommand(
        "verify-symbol", "Compare closed-form and Monte-Carlo symbol with verdicts");
    CLI::App* generator_check = app.add_subcommand(
        "generator-check", "Semigroup-derivative and martingale-residual generator checks");
    CLI::App* characteristics_check = app.add_subcommand(
        "characteristics-check", "Empirical drift, quadratic-variation and compensator checks");
    for (CLI::App* sub :
         {simulate, symbol, mc_symbol, verify_symbol, generator_check, characteristics_check})
        add_common_options(sub, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        std::string raw;
        cogarch::ExperimentConfig cfg = cogarch::load_config(opts.config_path, &raw);
        if (opts.seed) cfg.mc.seed = static_cast<std::uint64_t>(*opts.seed);
        if (opts.workers) {
            if (*opts.workers < 0) throw cogarch::ConfigError("--workers must be >= 0");
            cfg.mc.workers = *opts.workers;
        }
        if (opts.format) cfg.outputs.format = *opts.format;

        std::string out_dir = cfg.outputs.directory;
        if (const char* env = std::getenv("COGARCH_OUT_DIR")) out_dir = env;
        if (opts.out_dir) out_dir = *opts.out_dir;

        cogarch::RunContext ctx{std::move(cfg), cogarch::config_hash_hex(raw), out_dir};

        if (simulate->parsed()) return cogarch::run_simulate(ctx);
        if (symbol->parsed()) return cogarch::run_symbol(ctx);
        if (mc_symbol->parsed()) return cogarch::run_mc_symbol(ctx);
        if (verify_symbol->parsed()) return cogarch::run_verify_symbol(ctx);
        if (generator_check->parsed()) return cogarch::run_generator_check(ctx);
        if (characteristics_check->parsed()) return cogarch::run_characteristics_check(ctx);
        std::cerr << "error: no subcommand selected\n";
        return 2;
    } catch (const cogarch::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const cogarch::QuadratureError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
