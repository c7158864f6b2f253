// lobgeom: spectral graph projections to order-book liquidity profiles and
// cumulative-model fits. Subcommands: simulate, fit, compare, ingest-check.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "lobgeom/commands.hpp"
#include "lobgeom/config.hpp"
#include "lobgeom/errors.hpp"
#include "lobgeom/version.hpp"

namespace {

using lobgeom::RunConfig;

// Config file first, then explicit flag overrides, then the environment
// output-directory override.
void add_config_options(CLI::App* cmd, std::string& config_path,
                        std::vector<std::string>& overrides) {
    cmd->add_option("-c,--config", config_path, "configuration file");
    cmd->add_option("--set", overrides,
                    "override a configuration key (section.key=value)");
}

RunConfig build_config(const std::string& config_path,
                       const std::vector<std::string>& overrides) {
    RunConfig cfg;
    if (!config_path.empty()) cfg = lobgeom::load_config_file(config_path);
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw lobgeom::ConfigError("--set", "expected key=value, got '" + item + "'");
        }
        lobgeom::apply_override(cfg, item.substr(0, eq), item.substr(eq + 1));
    }
    if (const char* env = std::getenv("LOBGEOM_OUTPUT_DIR")) {
        if (*env != '\0') cfg.io.output_dir = env;
    }
    return cfg;
}

int run(int argc, char** argv) {
    CLI::App app{"spectral order-book liquidity toolkit"};
    app.set_version_flag("--version", lobgeom::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;

    auto* simulate = app.add_subcommand(
        "simulate", "simulate the relational graph and emit book snapshots");
    add_config_options(simulate, config_path, overrides);
    simulate->add_option_function<std::string>(
        "-o,--output-dir",
        [&](const std::string& v) { overrides.push_back("io.output_dir=" + v); });
    simulate->add_option_function<std::string>(
        "--seed", [&](const std::string& v) { overrides.push_back("simulation.seed=" + v); });
    simulate->add_option_function<std::string>(
        "--n-vertices",
        [&](const std::string& v) { overrides.push_back("simulation.n_vertices=" + v); });
    simulate->add_option_function<std::string>(
        "--steps", [&](const std::string& v) { overrides.push_back("simulation.n_steps=" + v); });
    simulate->add_option_function<std::string>(
        "--snapshot-every",
        [&](const std::string& v) { overrides.push_back("simulation.snapshot_every=" + v); });
    simulate->add_option_function<std::string>(
        "--topology",
        [&](const std::string& v) { overrides.push_back("simulation.topology=" + v); });
    simulate->add_option_function<std::string>(
        "--tick-size",
        [&](const std::string& v) { overrides.push_back("simulation.tick_size=" + v); });
    simulate->add_option_function<std::string>(
        "--size-rule",
        [&](const std::string& v) { overrides.push_back("simulation.size_rule=" + v); });

    auto* fit = app.add_subcommand(
        "fit", "fit cumulative models to snapshot or depth inputs");
    add_config_options(fit, config_path, overrides);
    fit->add_option_function<std::vector<std::string>>(
        "input", [&](const std::vector<std::string>& vs) {
            for (const auto& v : vs) overrides.push_back("io.input=" + v);
        },
        "snapshot CSVs or depth CSVs");
    fit->add_option_function<std::string>(
        "-o,--output-dir",
        [&](const std::string& v) { overrides.push_back("io.output_dir=" + v); });
    fit->add_option_function<std::string>(
        "--asset", [&](const std::string& v) { overrides.push_back("io.asset=" + v); });
    fit->add_option_function<std::string>(
        "-K", [&](const std::string& v) { overrides.push_back("geometry.K=" + v); });
    fit->add_option_function<std::string>(
        "-T", [&](const std::string& v) { overrides.push_back("geometry.T=" + v); });
    fit->add_option_function<std::string>(
        "--models", [&](const std::string& v) { overrides.push_back("fit.models=" + v); });
    fit->add_option_function<std::string>(
        "--target", [&](const std::string& v) { overrides.push_back("fit.target=" + v); });
    fit->add_option_function<std::string>(
        "--tick-size",
        [&](const std::string& v) { overrides.push_back("io.tick_size=" + v); });

    auto* comp = app.add_subcommand("compare",
                                    "aggregate fit reports into per-asset medians");
    std::vector<std::string> reports;
    std::string compare_out = "out";
    comp->add_option("reports", reports, "fit_report.csv files")->required();
    comp->add_option("-o,--output-dir", compare_out, "output directory");

    auto* check = app.add_subcommand("ingest-check",
                                     "validate a depth CSV without fitting");
    std::string check_path;
    double check_tick = 0.01;
    check->add_option("input", check_path, "depth CSV (.gz accepted)")->required();
    check->add_option("--tick-size", check_tick, "instrument tick size");

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed()) {
        lobgeom::cmd_simulate(build_config(config_path, overrides));
    } else if (fit->parsed()) {
        lobgeom::cmd_fit(build_config(config_path, overrides));
    } else if (comp->parsed()) {
        if (const char* env = std::getenv("LOBGEOM_OUTPUT_DIR")) {
            if (*env != '\0') compare_out = env;
        }
        lobgeom::cmd_compare(reports, compare_out, std::cout);
    } else if (check->parsed()) {
        const auto summary = lobgeom::ingest_check(check_path, check_tick);
        std::cout << "records = " << summary.records << "\n"
                  << "snapshots = " << summary.snapshots << "\n"
                  << "venues = " << summary.venues << "\n"
                  << "one_sided = " << summary.one_sided << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const lobgeom::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const lobgeom::NonConvergence& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const lobgeom::AllStartsFailed& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const lobgeom::DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const lobgeom::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
