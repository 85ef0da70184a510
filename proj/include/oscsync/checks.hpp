#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oscsync/controller.hpp"
#include "oscsync/dynamics.hpp"
#include "oscsync/graph.hpp"
#include "oscsync/leader.hpp"
#include "oscsync/matrix.hpp"

namespace oscsync {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

inline bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

/// Random topology guaranteed to contain a leader-rooted spanning tree:
/// each follower observes one earlier vertex, plus a few extra edges.
/// Weights are drawn from a continuous range so the Laplacian is
/// generically diagonalizable.
inline DirectedTopology random_tree_topology(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    std::vector<TopologyEdge> edges;
    for (int i = 1; i <= n; ++i) {
        std::uniform_int_distribution<int> parent(0, i - 1);
        edges.push_back({i, parent(rng), weight(rng)});
    }
    std::uniform_int_distribution<int> extra_count(0, n);
    std::uniform_int_distribution<int> any(0, n);
    const int extras = extra_count(rng);
    for (int e = 0; e < extras; ++e) {
        const int from = std::uniform_int_distribution<int>(1, n)(rng);
        const int to = any(rng);
        if (from == to) continue;
        edges.push_back({from, to, weight(rng)});
    }
    return DirectedTopology::from_edges(n, edges);
}

/// Random topology without a leader-rooted spanning tree: one follower's
/// outgoing edges are deleted, so it has no path to any vertex at all.
inline DirectedTopology random_broken_topology(std::mt19937_64& rng, int n) {
    DirectedTopology topo = random_tree_topology(rng, n);
    const int cut = std::uniform_int_distribution<int>(1, n)(rng);
    for (int j = 0; j <= n; ++j) topo.weights(cut, j) = 0.0;
    return topo;
}

namespace detail {

struct SpectrumSummary {
    int near_zero = 0;       // |lambda| < 1e-8
    double min_re_rest = 0;  // min real part over the remaining eigenvalues
};

inline SpectrumSummary summarize_spectrum(const ComplexVec& eigs) {
    SpectrumSummary s;
    s.min_re_rest = std::numeric_limits<double>::infinity();
    for (const Complex& l : eigs) {
        if (std::abs(l) < 1e-8)
            ++s.near_zero;
        else
            s.min_re_rest = std::min(s.min_re_rest, l.real());
    }
    return s;
}

inline bool spectrum_split_holds(const ComplexVec& eigs) {
    const SpectrumSummary s = summarize_spectrum(eigs);
    return s.near_zero == 1 && s.min_re_rest > 1e-9;
}

inline double max_abs_row_sum(const Mat& a) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j);
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

inline CheckResult make_result(const std::string& name, int failures, int cases,
                               const std::string& note = "") {
    CheckResult r;
    r.name = name;
    r.passed = failures == 0;
    std::ostringstream os;
    os << (cases - failures) << "/" << cases << " cases";
    if (!note.empty()) os << ", " << note;
    r.detail = os.str();
    return r;
}

}  // namespace detail

/// Randomized Laplacian-structure suite: spectra of leader-rooted
/// spanning-tree topologies versus broken ones, the block-diagonalizing
/// similarity decomposition, and the pole placement of the reduced and
/// stacked oscillator systems for alpha in {0.25, 1, 4}.
inline std::vector<CheckResult> structural_checks(std::uint64_t seed, int cases) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size(1, 8);
    const std::vector<double> alphas = {0.25, 1.0, 4.0};

    int split_fail = 0, kernel_fail = 0, decomp_fail = 0, spectrum_fail = 0;
    int pole_fail = 0, stacked_fail = 0, equivalence_fail = 0;
    int broken_fail = 0, broken_equivalence_fail = 0;
    double worst_kernel = 0.0, worst_pole_re = -std::numeric_limits<double>::infinity();

    for (int c = 0; c < cases; ++c) {
        const DirectedTopology topo = random_tree_topology(rng, size(rng));
        const LaplacianMatrix lap = build_laplacian(topo);
        const ComplexVec eigs = eigenvalues(lap.entries);
        if (!detail::spectrum_split_holds(eigs)) ++split_fail;
        const double kernel = std::max(lap.entries.max_abs_row(0), detail::max_abs_row_sum(lap.entries));
        worst_kernel = std::max(worst_kernel, kernel);
        if (kernel > 1e-12) ++kernel_fail;

        ComplexVec bar_eigs;
        try {
            const SimilarityDecomposition dec = decompose(lap);
            bar_eigs = eigenvalues(dec.reduced);
            ComplexVec expected = bar_eigs;
            expected.push_back(Complex(0.0, 0.0));
            if (!spectra_match(eigs, expected, 1e-8)) ++spectrum_fail;
            for (double alpha : alphas) {
                const ComplexVec poles = reduced_system_poles(dec, alpha);
                double max_re = -std::numeric_limits<double>::infinity();
                for (const Complex& p : poles) max_re = std::max(max_re, p.real());
                worst_pole_re = std::max(worst_pole_re, max_re);
                if (!(max_re < -1e-6)) ++pole_fail;
                ComplexVec stacked_expected = poles;
                const double w = std::sqrt(alpha);
                stacked_expected.push_back(Complex(0.0, w));
                stacked_expected.push_back(Complex(0.0, -w));
                if (!spectra_match(stacked_system_poles(lap, alpha), stacked_expected, 1e-8))
                    ++stacked_fail;
            }
            double min_re_bar = std::numeric_limits<double>::infinity();
            for (const Complex& l : bar_eigs) min_re_bar = std::min(min_re_bar, l.real());
            if (has_spanning_tree_rooted_at_leader(topo) != (min_re_bar > 1e-9))
                ++equivalence_fail;
        } catch (const DecompositionError&) {
            ++decomp_fail;
        }
    }

    for (int c = 0; c < cases; ++c) {
        const DirectedTopology topo = random_broken_topology(rng, size(rng));
        const LaplacianMatrix lap = build_laplacian(topo);
        const ComplexVec eigs = eigenvalues(lap.entries);
        // without a spanning tree, the simple-zero spectrum property must fail
        if (detail::spectrum_split_holds(eigs)) ++broken_fail;
        try {
            const SimilarityDecomposition dec = decompose(lap);
            ComplexVec expected = eigenvalues(dec.reduced);
            double min_re_bar = std::numeric_limits<double>::infinity();
            for (const Complex& l : expected) min_re_bar = std::min(min_re_bar, l.real());
            if (has_spanning_tree_rooted_at_leader(topo) != (min_re_bar > 1e-9))
                ++broken_equivalence_fail;
            expected.push_back(Complex(0.0, 0.0));
            if (!spectra_match(eigs, expected, 1e-8)) ++spectrum_fail;
        } catch (const DecompositionError&) {
            ++decomp_fail;
        }
    }

    std::vector<CheckResult> out;
    {
        std::ostringstream note;
        note << "worst |gamma' L| / |L 1| = " << worst_kernel;
        out.push_back(detail::make_result(
            "laplacian spectrum: simple zero eigenvalue, rest in open RHP (tree topologies)",
            split_fail, cases));
        out.push_back(detail::make_result("laplacian kernel: gamma' L = 0 and L 1 = 0 within 1e-12",
                                          kernel_fail, cases, note.str()));
    }
    out.push_back(detail::make_result(
        "laplacian converse: spectrum property fails without spanning tree", broken_fail, cases));
    out.push_back(detail::make_result("decomposition: T L T^{-1} block structure within 1e-12",
                                      decomp_fail, 2 * cases));
    out.push_back(detail::make_result("decomposition: spectrum(L) = {0} u spectrum(L_bar) within 1e-8",
                                      spectrum_fail, 2 * cases));
    {
        std::ostringstream note;
        note << "worst max Re = " << worst_pole_re;
        out.push_back(detail::make_result("reduced system: poles in open LHP for alpha in {0.25,1,4}",
                                          pole_fail, 3 * cases, note.str()));
    }
    out.push_back(detail::make_result(
        "stacked system: spectrum = {+-i sqrt(alpha)} u reduced poles within 1e-8", stacked_fail,
        3 * cases));
    out.push_back(detail::make_result("spanning tree <=> Re spectrum(L_bar) > 0", equivalence_fail + broken_equivalence_fail,
                                      2 * cases));
    return out;
}

/// Model-contract suite: the regressor identity, positive definiteness of
/// the mass matrix, skew-symmetry of Mdot - 2C for the arm and exact
/// dissipativity for the damped point mass.
inline std::vector<CheckResult> dynamics_checks(std::uint64_t seed, int draws) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> state(-2.0, 2.0);
    std::uniform_real_distribution<double> mass(0.5, 2.5);
    std::uniform_real_distribution<double> damping(0.2, 1.0);

    auto rand_vec = [&](int m) {
        Vec v(m);
        for (double& x : v) x = state(rng);
        return v;
    };

    int regressor_fail = 0, pd_fail = 0, skew_fail = 0, dissipative_fail = 0;
    double worst_regressor = 0.0, worst_skew = 0.0;

    for (int d = 0; d < draws; ++d) {
        const PlanarMassDamper damper(mass(rng), damping(rng));
        TwoLinkArm::Params ap;
        ap.m1 = mass(rng);
        ap.m2 = mass(rng);
        ap.lc1 = 0.5 * ap.l1;
        ap.lc2 = 0.5 * ap.l2;
        const TwoLinkArm arm(ap);
        const AgentModel* models[] = {&damper, &arm};
        for (const AgentModel* model : models) {
            const int m = model->dof();
            const Vec q = rand_vec(m), qdot = rand_vec(m), z = rand_vec(m), zdot = rand_vec(m);
            const Vec lhs = inverse_dynamics(*model, q, qdot, z, zdot);
            const Vec rhs = model->regressor(q, qdot, z, zdot) * model->true_params();
            const double err = norm_inf(vec_sub(lhs, rhs));
            worst_regressor = std::max(worst_regressor, err);
            if (err >= 1e-10) ++regressor_fail;

            const Mat mm = model->mass_matrix(q);
            bool pd = is_symmetric(mm, 1e-12) && cholesky_lower(mm).has_value();
            if (pd)
                for (const Complex& l : eigenvalues(mm))
                    if (l.real() <= 0.0) pd = false;
            if (!pd) ++pd_fail;
        }

        // skew-symmetry of the arm, analytic Mdot and finite-difference Mdot
        {
            const Vec q = rand_vec(2), qdot = rand_vec(2), x = rand_vec(2);
            const Mat c = arm.coriolis_matrix(q, qdot);
            const double qf_analytic =
                quadratic_form(x, arm.mass_matrix_rate(q, qdot) - 2.0 * c);
            const double qf_fd =
                quadratic_form(x, arm.mass_matrix_rate_fd(q, qdot, 1e-6) - 2.0 * c);
            const double err = std::max(std::abs(qf_analytic), std::abs(qf_fd));
            worst_skew = std::max(worst_skew, err);
            if (err >= 1e-8) ++skew_fail;
        }

        // exact dissipativity of the damped point mass
        {
            const Vec x = rand_vec(2);
            const Mat a = damper.mass_matrix_rate(x, x) - 2.0 * damper.coriolis_matrix(x, x);
            const double qf = quadratic_form(x, a);
            const double c2 = -2.0 * damper.damping();
            const double reference = x[0] * (c2 * x[0]) + x[1] * (c2 * x[1]);
            if (!(qf <= 0.0) || qf != reference) ++dissipative_fail;
        }
    }

    std::vector<CheckResult> out;
    {
        std::ostringstream note;
        note << "worst residual = " << worst_regressor;
        out.push_back(detail::make_result("regressor identity: inverse dynamics = Y a within 1e-10",
                                          regressor_fail, 2 * draws, note.str()));
    }
    out.push_back(detail::make_result("mass matrix: symmetric positive definite", pd_fail,
                                      2 * draws));
    {
        std::ostringstream note;
        note << "worst |x'(Mdot-2C)x| = " << worst_skew;
        out.push_back(detail::make_result("skew-symmetry: two-link arm x'(Mdot-2C)x vanishes",
                                          skew_fail, draws, note.str()));
    }
    out.push_back(detail::make_result("mass-damper: x'(Mdot-2C)x = -2c|x|^2 exactly, nonpositive",
                                      dissipative_fail, draws));
    return out;
}

/// Closed-loop identity: plugging the control torque into the plant gives
/// M sdot + C s = -K s + Y (a_hat - a), with sdot formed independently
/// from the acceleration and the neighbor terms.
inline std::vector<CheckResult> controller_checks(std::uint64_t seed, int draws) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> state(-1.5, 1.5);
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    std::uniform_real_distribution<double> gain(5.0, 30.0);
    const std::vector<double> alphas = {0.25, 1.0, 4.0};

    auto rand_vec = [&](int m) {
        Vec v(m);
        for (double& x : v) x = state(rng);
        return v;
    };

    int fail = 0;
    double worst = 0.0;
    for (int d = 0; d < draws; ++d) {
        AgentModelPtr model;
        if (d % 2 == 0)
            model = std::make_shared<PlanarMassDamper>(0.5 + 2.0 * std::abs(state(rng)),
                                                       0.2 + std::abs(state(rng)));
        else
            model = std::make_shared<TwoLinkArm>();
        const int m = model->dof();
        const double alpha = alphas[d % alphas.size()];
        const Vec q = rand_vec(m), qdot = rand_vec(m), q_int = rand_vec(m);
        Vec a_hat = rand_vec(model->param_dim());
        NeighborView nb;
        const int neighbor_count = 1 + d % 3;
        for (int k = 0; k < neighbor_count; ++k) nb.push_back({weight(rng), rand_vec(m), rand_vec(m)});
        const Mat feedback = gain(rng) * Mat::identity(m);

        const Vec qdot_r = reference_velocity(q, nb, q_int, alpha);
        const Vec qddot_r = reference_acceleration(q, qdot, nb, alpha);
        const Vec s = sliding_vector(qdot, qdot_r);
        const Vec tau = control_torque(*model, q, qdot, qdot_r, qddot_r, s, a_hat, feedback);
        const Vec qddot = forward_dynamics(*model, q, qdot, tau);

        // sdot per its defining expression: qdd + sum w (qd_i - qd_j) + alpha q
        Vec sdot = qddot;
        for (std::size_t c = 0; c < sdot.size(); ++c) {
            for (const Neighbor& nbj : nb) sdot[c] += nbj.weight * (qdot[c] - nbj.qdot[c]);
            sdot[c] += alpha * q[c];
        }

        Vec lhs = model->mass_matrix(q) * sdot;
        const Vec cs = model->coriolis_matrix(q, qdot) * s;
        for (std::size_t c = 0; c < lhs.size(); ++c) lhs[c] += cs[c];

        const Vec da = vec_sub(a_hat, model->true_params());
        Vec rhs = model->regressor(q, qdot, qdot_r, qddot_r) * da;
        const Vec ks = feedback * s;
        for (std::size_t c = 0; c < rhs.size(); ++c) rhs[c] -= ks[c];

        const double err = norm_inf(vec_sub(lhs, rhs));
        worst = std::max(worst, err);
        if (err >= 1e-9) ++fail;
    }
    std::ostringstream note;
    note << "worst residual = " << worst;
    return {detail::make_result("closed loop: M sdot + C s = -K s + Y (a_hat - a) within 1e-9", fail,
                                draws, note.str())};
}

namespace detail {

/// RK4 on the leader oscillator (q_int, q, qdot); the independent route
/// against which the closed form is checked.
inline LeaderState integrate_leader_rk4(const Vec& q0, const Vec& qdot0, double alpha, double dt,
                                        long steps, double* max_err_vs_closed_form = nullptr) {
    const std::size_t m = q0.size();
    Vec x(3 * m);
    std::copy(q0.begin(), q0.end(), x.begin() + m);
    std::copy(qdot0.begin(), qdot0.end(), x.begin() + 2 * m);
    auto deriv = [&](const Vec& y) {
        Vec d(3 * m);
        for (std::size_t c = 0; c < m; ++c) {
            d[c] = y[m + c];
            d[m + c] = y[2 * m + c];
            d[2 * m + c] = -alpha * y[m + c];
        }
        return d;
    };
    double worst = 0.0;
    for (long k = 0; k < steps; ++k) {
        const Vec k1 = deriv(x);
        Vec tmp(3 * m);
        for (std::size_t j = 0; j < x.size(); ++j) tmp[j] = x[j] + 0.5 * dt * k1[j];
        const Vec k2 = deriv(tmp);
        for (std::size_t j = 0; j < x.size(); ++j) tmp[j] = x[j] + 0.5 * dt * k2[j];
        const Vec k3 = deriv(tmp);
        for (std::size_t j = 0; j < x.size(); ++j) tmp[j] = x[j] + dt * k3[j];
        const Vec k4 = deriv(tmp);
        for (std::size_t j = 0; j < x.size(); ++j)
            x[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        if (max_err_vs_closed_form) {
            const LeaderState ref = leader_closed_form(static_cast<double>(k + 1) * dt, q0, qdot0, alpha);
            for (std::size_t c = 0; c < m; ++c) {
                worst = std::max(worst, std::abs(x[c] - ref.q_int[c]));
                worst = std::max(worst, std::abs(x[m + c] - ref.q[c]));
                worst = std::max(worst, std::abs(x[2 * m + c] - ref.qdot[c]));
            }
        }
    }
    if (max_err_vs_closed_form) *max_err_vs_closed_form = worst;
    LeaderState st;
    st.alpha = alpha;
    st.q_int.assign(x.begin(), x.begin() + m);
    st.q.assign(x.begin() + m, x.begin() + 2 * m);
    st.qdot.assign(x.begin() + 2 * m, x.end());
    return st;
}

}  // namespace detail

/// Leader oracle: the closed form against direct RK4 integration, and the
/// per-coordinate energy invariant alpha q^2 + qdot^2.
inline std::vector<CheckResult> leader_checks() {
    std::vector<CheckResult> out;
    {
        double worst = 0.0;
        detail::integrate_leader_rk4({2.0, 0.0}, {0.0, 1.0}, 1.0, 1e-3, 20000, &worst);
        CheckResult r;
        r.name = "leader: RK4 at dt = 1 ms matches closed form over 20 s within 1e-6";
        r.passed = worst < 1e-6;
        std::ostringstream os;
        os << "max deviation = " << worst;
        r.detail = os.str();
        out.push_back(r);
    }
    {
        double worst = 0.0;
        const std::vector<double> alphas = {0.25, 1.0, 4.0};
        for (double alpha : alphas) {
            const Vec q0 = {2.0, -1.0}, qdot0 = {0.5, 1.0};
            Vec energy0(q0.size());
            for (std::size_t c = 0; c < q0.size(); ++c)
                energy0[c] = alpha * q0[c] * q0[c] + qdot0[c] * qdot0[c];
            for (int k = 0; k <= 400; ++k) {
                const LeaderState st = leader_closed_form(0.05 * k, q0, qdot0, alpha);
                for (std::size_t c = 0; c < q0.size(); ++c) {
                    const double e = alpha * st.q[c] * st.q[c] + st.qdot[c] * st.qdot[c];
                    worst = std::max(worst, std::abs(e - energy0[c]));
                }
            }
        }
        CheckResult r;
        r.name = "leader: energy invariant alpha q^2 + qdot^2 constant within 1e-9";
        r.passed = worst < 1e-9;
        std::ostringstream os;
        os << "max drift = " << worst;
        r.detail = os.str();
        out.push_back(r);
    }
    return out;
}

}  // namespace oscsync
