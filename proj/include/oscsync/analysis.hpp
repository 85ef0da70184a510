#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscsync/graph.hpp"
#include "oscsync/simulator.hpp"

namespace oscsync {

/// Sample-to-sample Lyapunov increases are flagged when they exceed
/// 1e-6 * max(1, V(0)); the theory gives Vdot <= 0, the tolerance absorbs
/// integration noise.
constexpr double kLyapunovTolScale = 1e-6;

struct LyapunovViolationStats {
    long count = 0;
    double max_increase = 0.0;
};

inline LyapunovViolationStats count_lyapunov_violations(const std::vector<double>& v) {
    LyapunovViolationStats stats;
    if (v.empty() || !std::isfinite(v.front())) return stats;
    const double tol = kLyapunovTolScale * std::max(1.0, v.front());
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (!std::isfinite(v[k])) continue;
        const double inc = v[k] - v[k - 1];
        if (inc > tol) {
            ++stats.count;
            stats.max_increase = std::max(stats.max_increase, inc);
        }
    }
    return stats;
}

struct SyncReport {
    std::vector<double> t;
    std::vector<double> e_q;  // max_i ||q_i - q_0|| per sample
    std::vector<double> e_v;  // max_i ||qd_i - qd_0|| per sample
    double threshold = 0.0;
    bool converged = false;
    double convergence_time = 0.0;  // meaningful only when converged
    double final_e_q = 0.0;
    double final_e_v = 0.0;
    LyapunovViolationStats lyapunov;
};

/// Position/velocity synchronization errors against the leader, plus the
/// first time after which both stay below threshold through the end.
inline SyncReport compute_sync_report(const Trajectory& traj, double threshold) {
    if (traj.samples.empty()) throw std::invalid_argument("compute_sync_report: empty trajectory");
    SyncReport rep;
    rep.threshold = threshold;
    rep.t.reserve(traj.samples.size());
    for (const TrajectorySample& sample : traj.samples) {
        double eq = 0.0, ev = 0.0;
        for (const FollowerSample& f : sample.followers) {
            eq = std::max(eq, norm2(vec_sub(f.q, sample.leader.q)));
            ev = std::max(ev, norm2(vec_sub(f.qdot, sample.leader.qdot)));
        }
        rep.t.push_back(sample.t);
        rep.e_q.push_back(eq);
        rep.e_v.push_back(ev);
    }
    rep.final_e_q = rep.e_q.back();
    rep.final_e_v = rep.e_v.back();

    std::size_t first_bad_after = 0;  // index after the last violating sample
    for (std::size_t k = 0; k < rep.t.size(); ++k)
        if (rep.e_q[k] >= threshold || rep.e_v[k] >= threshold) first_bad_after = k + 1;
    if (first_bad_after < rep.t.size()) {
        rep.converged = true;
        rep.convergence_time = rep.t[first_bad_after];
    }

    for (int i = 0; i < traj.n; ++i) {
        std::vector<double> v;
        v.reserve(traj.samples.size());
        for (const TrajectorySample& sample : traj.samples)
            v.push_back(sample.followers[i].lyapunov);
        const LyapunovViolationStats s = count_lyapunov_violations(v);
        rep.lyapunov.count += s.count;
        rep.lyapunov.max_increase = std::max(rep.lyapunov.max_increase, s.max_increase);
    }
    return rep;
}

/// Similarity coordinates of the stacked positions: xi1 = q0, xi_E the
/// consecutive differences, and sigma_E = int xi_E - d0/alpha with
/// d0 = [qd0(0); 0; ...]. Each xi_E / sigma_E entry is a flat n*m vector.
struct XiSeries {
    std::vector<double> t;
    std::vector<Vec> xi1;
    std::vector<Vec> xi_e;
    std::vector<Vec> sigma_e;
};

inline XiSeries compute_xi(const Trajectory& traj, const SimilarityDecomposition& decomp,
                           double alpha) {
    if (traj.samples.empty()) throw std::invalid_argument("compute_xi: empty trajectory");
    const int n = traj.n;
    const int m = traj.m;
    if (decomp.reduced.rows() != static_cast<std::size_t>(n))
        throw std::invalid_argument("compute_xi: decomposition size does not match trajectory");
    if (alpha <= 0.0) throw std::invalid_argument("compute_xi: alpha must be positive");

    XiSeries out;
    Vec stacked(static_cast<std::size_t>(n + 1));  // one coordinate slice of q*
    for (const TrajectorySample& sample : traj.samples) {
        Vec xi1 = sample.leader.q;
        Vec xi_e(static_cast<std::size_t>(n) * m);
        for (int k = 0; k < n; ++k) {
            const Vec& upper = (k == 0) ? sample.leader.q : sample.followers[k - 1].q;
            const Vec& lower = sample.followers[k].q;
            for (int c = 0; c < m; ++c) xi_e[static_cast<std::size_t>(k) * m + c] = upper[c] - lower[c];
        }
        // cross-check against (T (x) I_m) q*, one coordinate slice at a time
        for (int c = 0; c < m; ++c) {
            stacked[0] = sample.leader.q[c];
            for (int i = 0; i < n; ++i) stacked[i + 1] = sample.followers[i].q[c];
            const Vec xi_slice = decomp.transform * stacked;
            double err = std::abs(xi_slice[0] - xi1[c]);
            for (int k = 0; k < n; ++k)
                err = std::max(err, std::abs(xi_slice[k + 1] - xi_e[static_cast<std::size_t>(k) * m + c]));
            if (err > 1e-12)
                throw std::logic_error("compute_xi: direct differences disagree with (T x I) q* by " +
                                       std::to_string(err));
        }
        out.t.push_back(sample.t);
        out.xi1.push_back(std::move(xi1));
        out.xi_e.push_back(std::move(xi_e));
    }

    // sigma_E(0) = -d0/alpha, then trapezoidal accumulation of xi_E
    Vec sigma(static_cast<std::size_t>(n) * m, 0.0);
    const Vec& qdot0_init = traj.samples.front().leader.qdot;
    for (int c = 0; c < m; ++c) sigma[c] = -qdot0_init[c] / alpha;
    out.sigma_e.push_back(sigma);
    for (std::size_t k = 1; k < out.t.size(); ++k) {
        const double half_dt = 0.5 * (out.t[k] - out.t[k - 1]);
        for (std::size_t j = 0; j < sigma.size(); ++j)
            sigma[j] += half_dt * (out.xi_e[k - 1][j] + out.xi_e[k][j]);
        out.sigma_e.push_back(sigma);
    }
    return out;
}

struct LyapunovSeries {
    std::vector<double> t;
    std::vector<std::vector<double>> v;  // v[i][k]: follower i, sample k
    LyapunovViolationStats per_run;
};

/// Recomputes V_i at every sample from the recorded states (positions,
/// velocities, integrals, estimates and the neighbors' recorded values)
/// using the scenario's true parameters.
inline LyapunovSeries lyapunov_series(const Trajectory& traj, const Scenario& sc) {
    if (traj.samples.empty()) throw std::invalid_argument("lyapunov_series: empty trajectory");
    if (sc.followers() != traj.n) throw std::invalid_argument("lyapunov_series: scenario mismatch");
    LyapunovSeries out;
    out.v.assign(static_cast<std::size_t>(traj.n), {});
    for (const TrajectorySample& sample : traj.samples) {
        out.t.push_back(sample.t);
        for (int i = 0; i < traj.n; ++i) {
            const FollowerSample& f = sample.followers[i];
            NeighborView nb;
            for (const auto& [j, w] : sc.topology.neighbors(i + 1)) {
                if (j == 0)
                    nb.push_back({w, sample.leader.q, sample.leader.qdot});
                else
                    nb.push_back({w, sample.followers[j - 1].q, sample.followers[j - 1].qdot});
            }
            const Vec qdot_r = reference_velocity(f.q, nb, f.q_int, sc.alpha);
            const Vec s = sliding_vector(f.qdot, qdot_r);
            out.v[i].push_back(lyapunov_value(*sc.models[i], sc.gains[i].adaptation, f.q, s, f.a_hat));
        }
    }
    for (const auto& series : out.v) {
        const LyapunovViolationStats s = count_lyapunov_violations(series);
        out.per_run.count += s.count;
        out.per_run.max_increase = std::max(out.per_run.max_increase, s.max_increase);
    }
    return out;
}

}  // namespace oscsync
