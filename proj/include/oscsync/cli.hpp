#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "oscsync/analysis.hpp"
#include "oscsync/checks.hpp"
#include "oscsync/io.hpp"
#include "oscsync/scenario_io.hpp"
#include "oscsync/simulator.hpp"

namespace oscsync::cli {

struct RunOptions {
    std::string scenario_path;  // unused by paper-scenario
    std::string out_dir = ".";
    std::optional<double> dt;
    std::optional<double> t_final;
    std::optional<std::string> integrator;
    double threshold = 0.05;
    bool break_tree = false;
};

namespace detail {

inline std::string format_complex(const Complex& z) {
    std::ostringstream os;
    os.precision(6);
    os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return os.str();
}

inline std::string format_spectrum(const ComplexVec& eigs) {
    std::ostringstream os;
    for (std::size_t k = 0; k < eigs.size(); ++k)
        os << (k ? ", " : "") << format_complex(eigs[k]);
    return os.str();
}

inline void apply_overrides(Scenario& sc, const RunOptions& opt) {
    if (opt.dt) sc.dt = *opt.dt;
    if (opt.t_final) sc.t_final = *opt.t_final;
    if (opt.integrator) {
        if (*opt.integrator == "rk4")
            sc.integrator = IntegratorMode::rk4;
        else if (*opt.integrator == "zoh-euler")
            sc.integrator = IntegratorMode::zoh_euler;
        else
            throw std::invalid_argument("unknown integrator '" + *opt.integrator +
                                        "' (expected rk4 or zoh-euler)");
    }
    if (opt.break_tree) sc = with_broken_tree(std::move(sc));
}

inline int run_and_report(Scenario sc, const RunOptions& opt, std::ostream& out,
                          std::ostream& err) {
    try {
        apply_overrides(sc, opt);
        sc.validate();
        const Trajectory traj = run(sc);
        const SyncReport report = compute_sync_report(traj, opt.threshold);

        namespace fs = std::filesystem;
        fs::create_directories(opt.out_dir);
        const fs::path csv_path = fs::path(opt.out_dir) / "trajectory.csv";
        const fs::path errors_path = fs::path(opt.out_dir) / "errors.csv";
        const fs::path report_path = fs::path(opt.out_dir) / "report.txt";
        {
            std::ofstream csv(csv_path, std::ios::binary);
            if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
            write_trajectory_csv(traj, csv);
        }
        {
            std::ofstream csv(errors_path, std::ios::binary);
            if (!csv) throw std::runtime_error("cannot write " + errors_path.string());
            write_sync_report_csv(report, csv);
        }
        {
            std::ofstream rep(report_path, std::ios::binary);
            if (!rep) throw std::runtime_error("cannot write " + report_path.string());
            rep << sync_report_text(report, traj.warnings);
        }
        for (const std::string& w : traj.warnings) err << "warning: " << w << "\n";
        out << sync_report_text(report, {});
        out << "trajectory: " << csv_path.string() << "\n";
        out << "errors:     " << errors_path.string() << "\n";
        out << "report:     " << report_path.string() << "\n";
        return 0;
    } catch (const SimulationDivergedError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace detail

/// `simulate`: load a scenario file, run it, emit trajectory.csv and
/// report.txt under --out.
inline int cmd_simulate(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    Scenario sc;
    try {
        sc = load_scenario(opt.scenario_path);
    } catch (const ScenarioParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return detail::run_and_report(std::move(sc), opt, out, err);
}

/// `paper-scenario`: run the built-in nine-agent chain study.
inline int cmd_paper_scenario(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    return detail::run_and_report(paper_scenario(), opt, out, err);
}

/// `graph-check`: structural analysis of a scenario's topology. Exit 0
/// iff the spanning-tree condition and all spectral checks pass.
inline int cmd_graph_check(const std::string& scenario_path, std::ostream& out,
                           std::ostream& err) {
    Scenario sc;
    try {
        sc = load_scenario(scenario_path);
    } catch (const ScenarioParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    const bool tree = has_spanning_tree_rooted_at_leader(sc.topology);
    const LaplacianMatrix lap = build_laplacian(sc.topology);
    const ComplexVec eigs = eigenvalues(lap.entries);
    out << "scenario:  " << scenario_path << " (" << sc.topology.n << " followers, alpha = "
        << sc.alpha << ")\n";
    out << "spanning tree rooted at leader: " << (tree ? "yes" : "no") << "\n";
    out << "laplacian eigenvalues:  " << detail::format_spectrum(eigs) << "\n";

    int near_zero = 0;
    double min_re_rest = std::numeric_limits<double>::infinity();
    for (const Complex& l : eigs) {
        if (std::abs(l) < 1e-8)
            ++near_zero;
        else
            min_re_rest = std::min(min_re_rest, l.real());
    }
    const double kernel_residual =
        std::max(lap.entries.max_abs_row(0), oscsync::detail::max_abs_row_sum(lap.entries));
    const bool spectrum_ok = near_zero == 1 && min_re_rest > 1e-9 && kernel_residual <= 1e-12;

    bool decomp_ok = true;
    bool poles_ok = false;
    double max_re_pole = std::numeric_limits<double>::infinity();
    try {
        const SimilarityDecomposition dec = decompose(lap);
        const ComplexVec bar_eigs = eigenvalues(dec.reduced);
        out << "L_bar eigenvalues:      " << detail::format_spectrum(bar_eigs) << "\n";
        ComplexVec expected = bar_eigs;
        expected.push_back(Complex(0.0, 0.0));
        decomp_ok = spectra_match(eigs, expected, 1e-8);
        const ComplexVec poles = reduced_system_poles(dec, sc.alpha);
        max_re_pole = -std::numeric_limits<double>::infinity();
        for (const Complex& p : poles) max_re_pole = std::max(max_re_pole, p.real());
        const double w = std::sqrt(sc.alpha);
        out << "leader oscillator poles: +-" << w << "i\n";
        out << "reduced system poles:   " << detail::format_spectrum(poles) << "\n";
        out << "max Re(reduced pole):   " << max_re_pole << "\n";
        poles_ok = max_re_pole < -1e-6;
    } catch (const DecompositionError& e) {
        decomp_ok = false;
        err << "error: " << e.what() << "\n";
    }

    out << "simple zero eigenvalue, rest in open RHP: " << (spectrum_ok ? "PASS" : "FAIL")
        << "\n";
    out << "similarity decomposition spectrum split:  " << (decomp_ok ? "PASS" : "FAIL") << "\n";
    out << "reduced poles in open LHP:                " << (poles_ok ? "PASS" : "FAIL") << "\n";
    return (tree && spectrum_ok && decomp_ok && poles_ok) ? 0 : 3;
}

struct VerifyOptions {
    std::uint64_t seed = 12345;
    int topology_cases = 200;
    int draws = 1000;
};

/// `verify`: the full randomized property suite (graph structure, model
/// contracts, closed-loop identity, leader oracle).
inline int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream&) {
    std::vector<CheckResult> results;
    auto append = [&results](std::vector<CheckResult> more) {
        for (auto& r : more) results.push_back(std::move(r));
    };
    append(structural_checks(opt.seed, opt.topology_cases));
    append(dynamics_checks(opt.seed + 1, opt.draws));
    append(controller_checks(opt.seed + 2, opt.draws));
    append(leader_checks());

    bool all_ok = true;
    for (const CheckResult& r : results) {
        out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.detail.empty()) out << " (" << r.detail << ")";
        out << "\n";
        all_ok = all_ok && r.passed;
    }
    out << (all_ok ? "verify: all checks passed\n" : "verify: FAILURES detected\n");
    return all_ok ? 0 : 4;
}

}  // namespace oscsync::cli
