#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "oscsync/dynamics.hpp"
#include "oscsync/matrix.hpp"

namespace oscsync {

/// Per-follower controller gains: K scales the sliding-vector feedback,
/// Gamma the parameter adaptation rate. Both are symmetric positive
/// definite in normal use; check() enforces that for scenario input.
struct Gains {
    Mat feedback;    // K, m x m
    Mat adaptation;  // Gamma, param_dim x param_dim

    static Gains scaled_identity(int dof, int param_dim, double k, double gamma) {
        return {k * Mat::identity(dof), gamma * Mat::identity(param_dim)};
    }

    void check(int dof, int param_dim) const {
        auto check_one = [](const Mat& g, int dim, const std::string& which) {
            if (g.rows() != static_cast<std::size_t>(dim) || g.cols() != static_cast<std::size_t>(dim))
                throw std::invalid_argument("gains: " + which + " must be " + std::to_string(dim) +
                                            "x" + std::to_string(dim));
            if (!is_symmetric(g, 1e-14))
                throw std::invalid_argument("gains: " + which + " is not symmetric");
            if (!cholesky_lower(g))
                throw std::invalid_argument("gains: " + which + " is not positive definite");
        };
        check_one(feedback, dof, "K");
        check_one(adaptation, param_dim, "Gamma");
    }
};

/// Integrated quantities owned by follower i's controller: the running
/// position integral and the parameter estimate.
struct ControllerState {
    Vec q_int;
    Vec a_hat;
};

/// What follower i sees of neighbor j: the edge weight and j's state.
struct Neighbor {
    double weight = 0.0;
    Vec q;
    Vec qdot;
};

using NeighborView = std::vector<Neighbor>;

/// qd_{r,i} = -sum_j w_ij (q_i - q_j) - alpha * int q_i
inline Vec reference_velocity(const Vec& q_i, const NeighborView& neighbors, const Vec& q_int,
                              double alpha) {
    check_same_size(q_i, q_int, "reference_velocity");
    Vec out = vec_scale(-alpha, q_int);
    for (const Neighbor& nb : neighbors) {
        check_same_size(q_i, nb.q, "reference_velocity: neighbor");
        for (std::size_t k = 0; k < out.size(); ++k) out[k] -= nb.weight * (q_i[k] - nb.q[k]);
    }
    return out;
}

/// qdd_{r,i} = -sum_j w_ij (qd_i - qd_j) - alpha * q_i
inline Vec reference_acceleration(const Vec& q_i, const Vec& qdot_i, const NeighborView& neighbors,
                                  double alpha) {
    check_same_size(q_i, qdot_i, "reference_acceleration");
    Vec out = vec_scale(-alpha, q_i);
    for (const Neighbor& nb : neighbors) {
        check_same_size(qdot_i, nb.qdot, "reference_acceleration: neighbor");
        for (std::size_t k = 0; k < out.size(); ++k) out[k] -= nb.weight * (qdot_i[k] - nb.qdot[k]);
    }
    return out;
}

/// s_i = qd_i - qd_{r,i}
inline Vec sliding_vector(const Vec& qdot_i, const Vec& qdot_r) {
    return vec_sub(qdot_i, qdot_r);
}

/// tau_i = -K s_i + Y(q, qd, qd_r, qdd_r) a_hat
inline Vec control_torque(const AgentModel& model, const Vec& q_i, const Vec& qdot_i,
                          const Vec& qdot_r, const Vec& qddot_r, const Vec& s_i, const Vec& a_hat,
                          const Mat& feedback_gain) {
    Vec tau = model.regressor(q_i, qdot_i, qdot_r, qddot_r) * a_hat;
    const Vec ks = feedback_gain * s_i;
    for (std::size_t k = 0; k < tau.size(); ++k) tau[k] -= ks[k];
    return tau;
}

/// da_hat/dt = -Gamma Y' s_i
inline Vec adaptation_rate(const AgentModel& model, const Vec& q_i, const Vec& qdot_i,
                           const Vec& qdot_r, const Vec& qddot_r, const Vec& s_i,
                           const Mat& adaptation_gain) {
    const Mat y = model.regressor(q_i, qdot_i, qdot_r, qddot_r);
    return vec_scale(-1.0, adaptation_gain * (y.transpose() * s_i));
}

}  // namespace oscsync
