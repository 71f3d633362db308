// memkernel — command-line front end for the batch scenarios

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "memkernel/scenario.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Memory-kernel master equations: evolve, certify and analyse quantum dynamical maps"};
    app.require_subcommand(1);

    std::string config_path;
    std::string outdir;
    memkernel::ScenarioOverrides overrides;
    double step = 0.0, horizon = 0.0, tol = 0.0;

    for (const std::string& kind : memkernel::scenario_kinds()) {
        CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " scenario");
        sub->set_help_flag("--help", "print this help message and exit");
        sub->add_option("-c,--config", config_path, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--outdir", outdir, "output directory")->required();
        sub->add_option("--h", step, "grid step, overrides grid.h")->check(CLI::PositiveNumber);
        sub->add_option("--T", horizon, "horizon, overrides grid.T")->check(CLI::PositiveNumber);
        sub->add_option("--tol", tol, "CP tolerance, overrides tolerance")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // CLI11 reports --help as success; every other parse error is an input error.
        const int code = app.exit(e);
        return code == 0 ? 0 : memkernel::exit_error;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--h") > 0) overrides.step = step;
    if (sub->count("--T") > 0) overrides.horizon = horizon;
    if (sub->count("--tol") > 0) overrides.tolerance = tol;

    memkernel::Json config;
    try {
        config = memkernel::load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "memkernel: invalid input: " << e.what() << '\n';
        return memkernel::exit_error;
    }
    return memkernel::run_scenario(sub->get_name(), config, outdir, overrides, std::cerr);
}
