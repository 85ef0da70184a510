#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "oscsync/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"adaptive oscillatory synchronization of Euler-Lagrange agent networks"};
    app.require_subcommand(1);

    oscsync::cli::RunOptions run_opt;
    std::string integrator;

    auto add_run_flags = [&](CLI::App* cmd, bool with_scenario) {
        if (with_scenario)
            cmd->add_option("--scenario", run_opt.scenario_path, "scenario file (JSON)")
                ->required();
        cmd->add_option("--out", run_opt.out_dir, "output directory")->capture_default_str();
        cmd->add_option("--dt", "override the integration step [s]")
            ->check(CLI::PositiveNumber)
            ->each([&](const std::string& v) { run_opt.dt = std::stod(v); });
        cmd->add_option("--tfinal", "override the simulated time span [s]")
            ->check(CLI::NonNegativeNumber)
            ->each([&](const std::string& v) { run_opt.t_final = std::stod(v); });
        cmd->add_option("--integrator", integrator, "integration mode: rk4 | zoh-euler")
            ->check(CLI::IsMember({"rk4", "zoh-euler"}))
            ->each([&](const std::string& v) { run_opt.integrator = v; });
        cmd->add_option("--threshold", run_opt.threshold,
                        "synchronization error threshold for the report")
            ->capture_default_str();
        cmd->add_flag("--break-tree", run_opt.break_tree,
                      "remove the edge 1 -> 0, disconnecting the network from the leader");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run a scenario file");
    add_run_flags(simulate, true);

    CLI::App* paper = app.add_subcommand("paper-scenario",
                                         "run the built-in nine-agent chain study");
    add_run_flags(paper, false);

    std::string graph_scenario;
    CLI::App* graph = app.add_subcommand("graph-check",
                                         "spectral and spanning-tree analysis of a topology");
    graph->add_option("--scenario", graph_scenario, "scenario file (JSON)")->required();

    oscsync::cli::VerifyOptions verify_opt;
    CLI::App* verify = app.add_subcommand("verify", "run the randomized property suite");
    verify->add_option("--seed", verify_opt.seed, "RNG seed")->capture_default_str();
    verify->add_option("--cases", verify_opt.topology_cases, "random topologies per suite")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    verify->add_option("--draws", verify_opt.draws, "random state draws per property")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed()) return oscsync::cli::cmd_simulate(run_opt, std::cout, std::cerr);
    if (paper->parsed()) return oscsync::cli::cmd_paper_scenario(run_opt, std::cout, std::cerr);
    if (graph->parsed()) return oscsync::cli::cmd_graph_check(graph_scenario, std::cout, std::cerr);
    if (verify->parsed()) return oscsync::cli::cmd_verify(verify_opt, std::cout, std::cerr);
    return 1;
}
