#include <iostream>

#include <CLI11.hpp>

#include "gblab/cli/run.hpp"

using namespace gblab::cli;

int main(int argc, char** argv) {
    CLI::App app{"Gaussian beam, X-ray and wave observability experiments"};
    app.require_subcommand(1);

    std::string run_path, validate_path;
    bool serial = false;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
    run_cmd->add_option("config", run_path, "Config JSON")->required()->check(CLI::ExistingFile);
    run_cmd->add_flag("--serial", serial, "Run sweep points sequentially");
    auto* val_cmd = app.add_subcommand("validate", "Check a config without running it");
    val_cmd->add_option("config", validate_path, "Config JSON")->required()->check(CLI::ExistingFile);
    auto* list_cmd = app.add_subcommand("list-fixtures", "Print fixture ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    if (*run_cmd) {
        const RunManifest m = run_file(run_path, serial);
        std::cout << m.status << " " << m.directory << "\n";
        for (const auto& c : m.checks) std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << c.value << "\n";
        if (!m.error.empty()) std::cerr << "error: " << m.error << "\n";
        return m.exit_code;
    }
    if (*val_cmd) {
        std::vector<Diagnostic> diags;
        try {
            diags = validate(load_config(validate_path));
        } catch (const gblab::ConfigError& e) {
            diags.push_back({"error", "config", e.what()});
        }
        std::cout << to_json(diags).dump(2) << "\n";
        return has_errors(diags) ? exit_config : exit_pass;
    }
    if (*list_cmd) {
        std::cout << list_fixtures().dump(2) << "\n";
        return exit_pass;
    }
    return exit_config;
}
