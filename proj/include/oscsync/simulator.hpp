#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oscsync/controller.hpp"
#include "oscsync/dynamics.hpp"
#include "oscsync/graph.hpp"
#include "oscsync/leader.hpp"
#include "oscsync/matrix.hpp"

namespace oscsync {

enum class IntegratorMode {
    rk4,       // classical RK4, controller evaluated at every stage
    zoh_euler  // torque frozen over each dt, forward-Euler plant
};

inline std::string to_string(IntegratorMode mode) {
    return mode == IntegratorMode::rk4 ? "rk4" : "zoh-euler";
}

struct FollowerInit {
    Vec q;
    Vec qdot;
};

/// Full experiment description. Per-follower lists are indexed 0..n-1 for
/// followers 1..n. q_int_init is normally empty (integral states start at
/// zero); a nonempty list overrides them, e.g. to start on the
/// synchronized manifold.
struct Scenario {
    DirectedTopology topology;
    std::vector<AgentModelPtr> models;
    std::vector<Gains> gains;
    double alpha = 1.0;
    Vec leader_q0;
    Vec leader_qdot0;
    std::vector<FollowerInit> follower_init;
    std::vector<Vec> a_hat_init;
    std::vector<Vec> q_int_init;
    IntegratorMode integrator = IntegratorMode::rk4;
    double dt = 0.005;
    double t_final = 60.0;
    int record_stride = 10;

    int followers() const { return topology.n; }
    int dof() const { return models.empty() ? 0 : models.front()->dof(); }

    /// Structural validation; strict additionally requires SPD gains (used
    /// for scenario-file input).
    void validate(bool strict = false) const {
        topology.validate();
        const std::size_t n = static_cast<std::size_t>(topology.n);
        if (models.size() != n) throw std::invalid_argument("scenario: need one model per follower");
        if (gains.size() != n) throw std::invalid_argument("scenario: need one gain set per follower");
        if (follower_init.size() != n)
            throw std::invalid_argument("scenario: need one initial state per follower");
        if (a_hat_init.size() != n)
            throw std::invalid_argument("scenario: need one initial estimate per follower");
        if (!q_int_init.empty() && q_int_init.size() != n)
            throw std::invalid_argument("scenario: q_int_init must be empty or one entry per follower");
        if (alpha <= 0.0) throw std::invalid_argument("scenario: alpha must be positive");
        if (dt <= 0.0) throw std::invalid_argument("scenario: dt must be positive");
        if (t_final < 0.0) throw std::invalid_argument("scenario: t_final must be nonnegative");
        if (record_stride < 1) throw std::invalid_argument("scenario: record_stride must be >= 1");
        const int m = dof();
        if (m < 1) throw std::invalid_argument("scenario: models missing");
        if (leader_q0.size() != static_cast<std::size_t>(m) ||
            leader_qdot0.size() != static_cast<std::size_t>(m))
            throw std::invalid_argument("scenario: leader initial state has wrong dimension");
        for (std::size_t i = 0; i < n; ++i) {
            if (models[i]->dof() != m)
                throw std::invalid_argument("scenario: follower " + std::to_string(i + 1) +
                                            " has dof != common dof");
            if (follower_init[i].q.size() != static_cast<std::size_t>(m) ||
                follower_init[i].qdot.size() != static_cast<std::size_t>(m))
                throw std::invalid_argument("scenario: follower " + std::to_string(i + 1) +
                                            " initial state has wrong dimension");
            if (a_hat_init[i].size() != static_cast<std::size_t>(models[i]->param_dim()))
                throw std::invalid_argument("scenario: follower " + std::to_string(i + 1) +
                                            " initial estimate has wrong dimension");
            if (!q_int_init.empty() && q_int_init[i].size() != static_cast<std::size_t>(m))
                throw std::invalid_argument("scenario: follower " + std::to_string(i + 1) +
                                            " q_int_init has wrong dimension");
            if (strict) {
                gains[i].check(m, models[i]->param_dim());
            } else if (gains[i].feedback.rows() != static_cast<std::size_t>(m) ||
                       gains[i].feedback.cols() != static_cast<std::size_t>(m) ||
                       gains[i].adaptation.rows() !=
                           static_cast<std::size_t>(models[i]->param_dim()) ||
                       gains[i].adaptation.cols() !=
                           static_cast<std::size_t>(models[i]->param_dim())) {
                throw std::invalid_argument("scenario: follower " + std::to_string(i + 1) +
                                            " gain matrices have wrong dimension");
            }
        }
    }
};

/// Flat integration state of the whole follower network. Per-follower
/// block layout: [q (m) | qdot (m) | q_int (m) | a_hat (param_dim)].
struct NetworkState {
    Vec x;
    std::vector<std::size_t> offset;  // block start per follower
    int m = 0;

    static NetworkState initial(const Scenario& sc) {
        NetworkState st;
        st.m = sc.dof();
        const std::size_t n = static_cast<std::size_t>(sc.followers());
        st.offset.resize(n);
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            st.offset[i] = total;
            total += 3 * static_cast<std::size_t>(st.m) +
                     static_cast<std::size_t>(sc.models[i]->param_dim());
        }
        st.x.assign(total, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            st.write(st.q_off(i), sc.follower_init[i].q);
            st.write(st.qdot_off(i), sc.follower_init[i].qdot);
            if (!sc.q_int_init.empty()) st.write(st.q_int_off(i), sc.q_int_init[i]);
            st.write(st.a_hat_off(i), sc.a_hat_init[i]);
        }
        return st;
    }

    std::size_t q_off(std::size_t i) const { return offset[i]; }
    std::size_t qdot_off(std::size_t i) const { return offset[i] + m; }
    std::size_t q_int_off(std::size_t i) const { return offset[i] + 2 * m; }
    std::size_t a_hat_off(std::size_t i) const { return offset[i] + 3 * m; }
    std::size_t block_size(std::size_t i) const {
        return (i + 1 < offset.size() ? offset[i + 1] : x.size()) - offset[i];
    }

    Vec read(std::size_t off, std::size_t len) const {
        return Vec(x.begin() + off, x.begin() + off + len);
    }
    void write(std::size_t off, const Vec& v) {
        std::copy(v.begin(), v.end(), x.begin() + off);
    }

    Vec q(std::size_t i) const { return read(q_off(i), m); }
    Vec qdot(std::size_t i) const { return read(qdot_off(i), m); }
    Vec q_int(std::size_t i) const { return read(q_int_off(i), m); }
    Vec a_hat(std::size_t i) const { return read(a_hat_off(i), block_size(i) - 3 * m); }
};

class SimulationDivergedError : public std::runtime_error {
public:
    SimulationDivergedError(int agent, double time)
        : std::runtime_error("simulation diverged: non-finite state of follower " +
                             std::to_string(agent) + " at t = " + std::to_string(time) + " s"),
          agent_index(agent),
          time_s(time) {}
    int agent_index;
    double time_s;
};

namespace detail {

struct FollowerEval {
    Vec qdot_r;
    Vec qddot_r;
    Vec s;
    Vec tau;
    Vec a_hat_rate;
    Vec qddot;
};

inline NeighborView gather_neighbors(const Scenario& sc, const NetworkState& st,
                                     const LeaderState& leader, int follower) {
    NeighborView view;
    for (const auto& [j, w] : sc.topology.neighbors(follower)) {
        if (j == 0)
            view.push_back({w, leader.q, leader.qdot});
        else
            view.push_back({w, st.q(j - 1), st.qdot(j - 1)});
    }
    return view;
}

/// Controller + plant evaluation for follower i (index 0-based) at the
/// given network state and leader state.
inline FollowerEval eval_follower(const Scenario& sc, const NetworkState& st,
                                  const LeaderState& leader, std::size_t i) {
    const AgentModel& model = *sc.models[i];
    const Vec q = st.q(i);
    const Vec qdot = st.qdot(i);
    const Vec q_int = st.q_int(i);
    const Vec a_hat = st.a_hat(i);
    const NeighborView nb = gather_neighbors(sc, st, leader, static_cast<int>(i) + 1);

    FollowerEval ev;
    ev.qdot_r = reference_velocity(q, nb, q_int, sc.alpha);
    ev.qddot_r = reference_acceleration(q, qdot, nb, sc.alpha);
    ev.s = sliding_vector(qdot, ev.qdot_r);
    ev.tau = control_torque(model, q, qdot, ev.qdot_r, ev.qddot_r, ev.s, a_hat,
                            sc.gains[i].feedback);
    ev.a_hat_rate = adaptation_rate(model, q, qdot, ev.qdot_r, ev.qddot_r, ev.s,
                                    sc.gains[i].adaptation);
    ev.qddot = forward_dynamics(model, q, qdot, ev.tau);
    return ev;
}

inline Vec network_derivative(const Scenario& sc, const NetworkState& st, double t) {
    const LeaderState leader = leader_closed_form(t, sc.leader_q0, sc.leader_qdot0, sc.alpha);
    Vec dx(st.x.size(), 0.0);
    const std::size_t n = st.offset.size();
    for (std::size_t i = 0; i < n; ++i) {
        const FollowerEval ev = eval_follower(sc, st, leader, i);
        std::copy(st.x.begin() + st.qdot_off(i), st.x.begin() + st.qdot_off(i) + st.m,
                  dx.begin() + st.q_off(i));
        std::copy(ev.qddot.begin(), ev.qddot.end(), dx.begin() + st.qdot_off(i));
        std::copy(st.x.begin() + st.q_off(i), st.x.begin() + st.q_off(i) + st.m,
                  dx.begin() + st.q_int_off(i));
        std::copy(ev.a_hat_rate.begin(), ev.a_hat_rate.end(), dx.begin() + st.a_hat_off(i));
    }
    return dx;
}

inline NetworkState shifted(const NetworkState& st, double scale, const Vec& k) {
    NetworkState out = st;
    for (std::size_t j = 0; j < out.x.size(); ++j) out.x[j] += scale * k[j];
    return out;
}

}  // namespace detail

/// Advance the coupled network one step of size scenario.dt from time t.
/// RK4 re-evaluates the controller at each stage with same-stage neighbor
/// values; zoh-euler freezes torque and adaptation over the step.
inline NetworkState step(const Scenario& sc, const NetworkState& state, double t) {
    const double dt = sc.dt;
    if (sc.integrator == IntegratorMode::zoh_euler) {
        const Vec k1 = detail::network_derivative(sc, state, t);
        return detail::shifted(state, dt, k1);
    }
    const Vec k1 = detail::network_derivative(sc, state, t);
    const Vec k2 = detail::network_derivative(sc, detail::shifted(state, 0.5 * dt, k1), t + 0.5 * dt);
    const Vec k3 = detail::network_derivative(sc, detail::shifted(state, 0.5 * dt, k2), t + 0.5 * dt);
    const Vec k4 = detail::network_derivative(sc, detail::shifted(state, dt, k3), t + dt);
    NetworkState out = state;
    for (std::size_t j = 0; j < out.x.size(); ++j)
        out.x[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    return out;
}

struct FollowerSample {
    Vec q;
    Vec qdot;
    Vec q_int;
    Vec a_hat;
    Vec s;
    Vec tau;
    double lyapunov = 0.0;
};

struct TrajectorySample {
    double t = 0.0;
    LeaderState leader;
    std::vector<FollowerSample> followers;
};

struct Trajectory {
    int n = 0;
    int m = 0;
    double alpha = 1.0;
    std::vector<TrajectorySample> samples;
    std::vector<std::string> warnings;
};

/// V_i = 1/2 s' M(q) s + 1/2 da' Gamma^{-1} da with da = a_hat - a_true.
/// For singular Gamma the parameter term is 0 when da = 0 (limit value)
/// and NaN otherwise.
inline double lyapunov_value(const AgentModel& model, const Mat& adaptation_gain, const Vec& q,
                             const Vec& s, const Vec& a_hat) {
    const double s_term = 0.5 * dot(s, model.mass_matrix(q) * s);
    Vec da = vec_sub(a_hat, model.true_params());
    const auto chol = cholesky_lower(adaptation_gain);
    if (!chol) {
        if (norm_inf(da) == 0.0) return s_term;
        return std::numeric_limits<double>::quiet_NaN();
    }
    return s_term + 0.5 * dot(da, cholesky_solve(*chol, da));
}

namespace detail {

inline long simulation_steps(double t_final, double dt) {
    const double raw = t_final / dt;
    const double rounded = std::round(raw);
    if (std::abs(raw - rounded) < 1e-6 * std::max(1.0, std::abs(rounded)))
        return static_cast<long>(rounded);
    return static_cast<long>(std::floor(raw));
}

inline TrajectorySample record_sample(const Scenario& sc, const NetworkState& st, double t) {
    TrajectorySample sample;
    sample.t = t;
    sample.leader = leader_closed_form(t, sc.leader_q0, sc.leader_qdot0, sc.alpha);
    const std::size_t n = st.offset.size();
    sample.followers.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        FollowerSample& f = sample.followers[i];
        f.q = st.q(i);
        f.qdot = st.qdot(i);
        f.q_int = st.q_int(i);
        f.a_hat = st.a_hat(i);
        const FollowerEval ev = eval_follower(sc, st, sample.leader, i);
        f.s = ev.s;
        f.tau = ev.tau;
        f.lyapunov = lyapunov_value(*sc.models[i], sc.gains[i].adaptation, f.q, f.s, f.a_hat);
    }
    return sample;
}

inline void check_finite(const NetworkState& st, double t) {
    for (std::size_t i = 0; i < st.offset.size(); ++i) {
        const std::size_t end = st.offset[i] + st.block_size(i);
        for (std::size_t j = st.offset[i]; j < end; ++j) {
            const double v = st.x[j];
            if (!std::isfinite(v) || std::abs(v) > 1e12)
                throw SimulationDivergedError(static_cast<int>(i) + 1, t);
        }
    }
}

}  // namespace detail

/// Integrate the scenario over [0, t_final], recording every record_stride
/// steps. The leader is never integrated; it comes from the closed form.
inline Trajectory run(const Scenario& sc) {
    sc.validate();
    Trajectory traj;
    traj.n = sc.followers();
    traj.m = sc.dof();
    traj.alpha = sc.alpha;
    if (!has_spanning_tree_rooted_at_leader(sc.topology))
        traj.warnings.push_back(
            "topology has no spanning tree rooted at the leader; synchronization is not guaranteed");

    const long steps = detail::simulation_steps(sc.t_final, sc.dt);
    NetworkState state = NetworkState::initial(sc);
    detail::check_finite(state, 0.0);
    traj.samples.reserve(static_cast<std::size_t>(steps / sc.record_stride) + 1);
    traj.samples.push_back(detail::record_sample(sc, state, 0.0));
    for (long k = 1; k <= steps; ++k) {
        state = step(sc, state, static_cast<double>(k - 1) * sc.dt);
        const double t = static_cast<double>(k) * sc.dt;
        detail::check_finite(state, t);
        if (k % sc.record_stride == 0)
            traj.samples.push_back(detail::record_sample(sc, state, t));
    }
    return traj;
}

}  // namespace oscsync
