// Acceptance suite: drives the built-in chain study and the randomized
// structural checks end to end and prints one PASS/FAIL line per
// criterion. Exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "oscsync/analysis.hpp"
#include "oscsync/checks.hpp"
#include "oscsync/scenario_io.hpp"

using namespace oscsync;

namespace {

struct Criterion {
    int number;
    std::string name;
    bool passed;
    std::string detail;
};

std::vector<Criterion> g_criteria;

void report(int number, const std::string& name, bool passed, const std::string& detail) {
    g_criteria.push_back({number, name, passed, detail});
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

bool collect(const std::vector<CheckResult>& results, const char* prefix, std::string& detail) {
    bool ok = true;
    bool any = false;
    for (const CheckResult& r : results) {
        if (r.name.rfind(prefix, 0) != 0) continue;
        any = true;
        ok = ok && r.passed;
        if (!detail.empty()) detail += "; ";
        detail += r.name + ": " + (r.passed ? "ok" : "FAIL") + " (" + r.detail + ")";
    }
    if (!any) detail += std::string("no checks matched '") + prefix + "'";
    return ok && any;
}

void simulation_criteria() {
    const Scenario sc = paper_scenario();
    const Trajectory traj = run(sc);

    // 1a: errors below 0.05 throughout the final 10 s
    double worst_eq = 0.0, worst_ev = 0.0;
    // 1b: recorded leader equals [2 cos t, sin t] and its derivative
    double worst_leader = 0.0;
    for (const TrajectorySample& sample : traj.samples) {
        worst_leader = std::max(
            worst_leader,
            std::max(std::abs(sample.leader.q[0] - 2.0 * std::cos(sample.t)),
                     std::abs(sample.leader.q[1] - std::sin(sample.t))));
        worst_leader = std::max(
            worst_leader,
            std::max(std::abs(sample.leader.qdot[0] + 2.0 * std::sin(sample.t)),
                     std::abs(sample.leader.qdot[1] - std::cos(sample.t))));
        if (sample.t < sc.t_final - 10.0) continue;
        for (const FollowerSample& f : sample.followers) {
            worst_eq = std::max(worst_eq, norm2(vec_sub(f.q, sample.leader.q)));
            worst_ev = std::max(worst_ev, norm2(vec_sub(f.qdot, sample.leader.qdot)));
        }
    }
    report(1, "paper scenario: e_q, e_v < 0.05 over the final 10 s; leader exact to 1e-12",
           worst_eq < 0.05 && worst_ev < 0.05 && worst_leader < 1e-12,
           "max e_q = " + fmt(worst_eq) + ", max e_v = " + fmt(worst_ev) +
               ", leader deviation = " + fmt(worst_leader));

    // 6: per-follower Lyapunov monotonicity at tolerance 1e-6 max(1, V(0))
    long violations = 0;
    double worst_increase = 0.0;
    for (int i = 0; i < traj.n; ++i) {
        std::vector<double> v;
        v.reserve(traj.samples.size());
        for (const TrajectorySample& sample : traj.samples)
            v.push_back(sample.followers[i].lyapunov);
        const LyapunovViolationStats stats = count_lyapunov_violations(v);
        violations += stats.count;
        worst_increase = std::max(worst_increase, stats.max_increase);
    }
    report(6, "paper scenario: every V_i nonincreasing within 1e-6 max(1, V_i(0))",
           violations == 0,
           std::to_string(violations) + " violations, worst increase = " + fmt(worst_increase));

    // 8: removing the edge 1 -> 0 must defeat synchronization
    const Trajectory broken_traj = run(with_broken_tree(paper_scenario()));
    const SyncReport broken_rep = compute_sync_report(broken_traj, 0.05);
    report(8, "necessity: --break-tree run ends with e_q > 0.1 (not converged)",
           !broken_rep.converged && broken_rep.final_e_q > 0.1,
           "final e_q = " + fmt(broken_rep.final_e_q) +
               (broken_rep.converged ? ", converged (unexpected)" : ", not converged"));

    // 7b: halving dt changes the final positions by < 1e-6
    Scenario half = paper_scenario();
    half.dt = 0.0025;
    half.record_stride = 20;
    const Trajectory fine = run(half);
    double worst_delta = 0.0;
    const TrajectorySample& a = traj.samples.back();
    const TrajectorySample& b = fine.samples.back();
    for (int i = 0; i < traj.n; ++i)
        worst_delta =
            std::max(worst_delta, norm_inf(vec_sub(a.followers[i].q, b.followers[i].q)));

    // 7a: leader RK4 oracle
    double leader_dev = 0.0;
    detail::integrate_leader_rk4({2.0, 0.0}, {0.0, 1.0}, 1.0, 1e-3, 20000, &leader_dev);
    report(7,
           "integrator oracle: leader RK4 (1 ms, 20 s) within 1e-6; dt halving moves final "
           "positions < 1e-6",
           leader_dev < 1e-6 && worst_delta < 1e-6,
           "leader deviation = " + fmt(leader_dev) + ", position delta = " + fmt(worst_delta));
}

}  // namespace

int main() {
    simulation_criteria();

    const auto structural = structural_checks(12345, 200);
    {
        std::string detail;
        const bool laplacian_ok = collect(structural, "laplacian", detail);
        bool equivalence = true;
        for (const CheckResult& r : structural)
            if (r.name.rfind("spanning tree", 0) == 0) equivalence = equivalence && r.passed;
        report(2, "laplacian spectrum suite over 200 spanning-tree and 200 broken random topologies",
               laplacian_ok && equivalence, detail);
    }
    {
        std::string detail;
        report(3, "similarity decomposition: block structure 1e-12, spectrum split 1e-8",
               collect(structural, "decomposition", detail), detail);
    }
    {
        std::string detail;
        const bool reduced_ok = collect(structural, "reduced system", detail);
        const bool stacked_ok = collect(structural, "stacked system", detail);
        report(4, "pole placement: reduced poles in the open LHP; stacked = leader pair + reduced",
               reduced_ok && stacked_ok, detail);
    }
    {
        const auto dynamics = dynamics_checks(12346, 1000);
        std::string detail;
        bool ok = true;
        for (const CheckResult& r : dynamics) {
            ok = ok && r.passed;
            if (!detail.empty()) detail += "; ";
            detail += r.name + ": " + (r.passed ? "ok" : "FAIL") + " (" + r.detail + ")";
        }
        report(5,
               "model property suites: regressor 1e-10, PD mass matrix, skew-symmetry, "
               "dissipativity",
               ok, detail);
    }

    std::sort(g_criteria.begin(), g_criteria.end(),
              [](const Criterion& a, const Criterion& b) { return a.number < b.number; });
    bool all_ok = true;
    for (const Criterion& c : g_criteria) {
        std::printf("[%s] criterion %d: %s\n", c.passed ? "PASS" : "FAIL", c.number,
                    c.name.c_str());
        std::printf("       %s\n", c.detail.c_str());
        all_ok = all_ok && c.passed;
    }
    std::printf("%s\n",
                all_ok ? "acceptance: all criteria passed" : "acceptance: FAILURES detected");
    return all_ok ? 0 : 1;
}
