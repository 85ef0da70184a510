#pragma once

#include <cmath>
#include <stdexcept>

#include "oscsync/matrix.hpp"

namespace oscsync {

/// Virtual leader oscillator qdd0 = -alpha q0, tracked together with its
/// running position integral. Along exact trajectories
/// alpha q0^2 + qd0^2 is constant per coordinate.
struct LeaderState {
    Vec q_int;  // integral of q0 from 0 to t
    Vec q;
    Vec qdot;
    double alpha = 1.0;
};

/// Exact solution of the leader oscillator at time t:
///   int q0 = sin(w t)/w q0(0) + (1 - cos(w t))/alpha qd0(0)
///   q0     = cos(w t) q0(0) + sin(w t)/w qd0(0)
///   qd0    = -w sin(w t) q0(0) + cos(w t) qd0(0)
/// with w = sqrt(alpha).
inline LeaderState leader_closed_form(double t, const Vec& q0_init, const Vec& qdot0_init,
                                      double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("leader_closed_form: alpha must be positive");
    if (t < 0.0) throw std::invalid_argument("leader_closed_form: t must be nonnegative");
    check_same_size(q0_init, qdot0_init, "leader_closed_form");
    const double w = std::sqrt(alpha);
    const double s = std::sin(w * t);
    const double c = std::cos(w * t);
    const std::size_t m = q0_init.size();
    LeaderState st;
    st.alpha = alpha;
    st.q_int.resize(m);
    st.q.resize(m);
    st.qdot.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        st.q_int[k] = (s / w) * q0_init[k] + ((1.0 - c) / alpha) * qdot0_init[k];
        st.q[k] = c * q0_init[k] + (s / w) * qdot0_init[k];
        st.qdot[k] = -w * s * q0_init[k] + c * qdot0_init[k];
    }
    return st;
}

inline Vec leader_acceleration(const LeaderState& state) {
    return vec_scale(-state.alpha, state.q);
}

}  // namespace oscsync
