#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oscsync/controller.hpp"
#include "oscsync/dynamics.hpp"

using namespace oscsync;

namespace {

Vec random_vec(std::mt19937_64& rng, int m, double lo = -1.5, double hi = 1.5) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vec v(m);
    for (double& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST_CASE("gains validation") {
    Gains g = Gains::scaled_identity(2, 2, 20.0, 2.0);
    CHECK_NOTHROW(g.check(2, 2));

    g.feedback(0, 1) = 1e-10;  // asymmetric beyond tolerance
    CHECK_THROWS_AS(g.check(2, 2), std::invalid_argument);

    g = Gains::scaled_identity(2, 2, 20.0, 2.0);
    g.adaptation = Mat{{1, 2}, {2, 1}};  // indefinite
    CHECK_THROWS_AS(g.check(2, 2), std::invalid_argument);

    g = Gains::scaled_identity(2, 3, 20.0, 2.0);
    CHECK_THROWS_AS(g.check(2, 2), std::invalid_argument);
}

TEST_CASE("reference_velocity") {
    SECTION("integral term only") {
        CHECK(reference_velocity({0, 0}, {}, {1, 0}, 1.0) == Vec{-1.0, 0.0});
    }
    SECTION("consensus already reached") {
        const NeighborView nb{{1.0, {0.4, -0.2}, {0, 0}}};
        CHECK(reference_velocity({0.4, -0.2}, nb, {0, 0}, 1.0) == Vec{0.0, 0.0});
    }
    SECTION("hand evaluation with a leader neighbor") {
        const NeighborView nb{{1.0, {2, 0}, {0, 0}}};
        CHECK(reference_velocity({3, 2}, nb, {0, 0}, 1.0) == Vec{-1.0, -2.0});
    }
}

TEST_CASE("reference_acceleration") {
    SECTION("matched velocities at the origin") {
        const NeighborView nb{{1.0, {1, 1}, {0.7, -0.3}}, {2.0, {0, 0}, {0.7, -0.3}}};
        CHECK(reference_acceleration({0, 0}, {0.7, -0.3}, nb, 1.0) == Vec{0.0, 0.0});
    }
    SECTION("pure oscillator term without neighbors") {
        CHECK(reference_acceleration({2, 0}, {0.5, 0.5}, {}, 1.0) == Vec{-2.0, 0.0});
    }
    SECTION("hand evaluation") {
        const NeighborView nb{{1.0, {0, 0}, {0, 1}}};
        CHECK(reference_acceleration({0, 0}, {1, 0}, nb, 1.0) == Vec{-1.0, 1.0});
    }
}

TEST_CASE("sliding_vector") {
    CHECK(sliding_vector({1, 2}, {1, 2}) == Vec{0.0, 0.0});
    CHECK(sliding_vector({1, 2}, {0, 2}) == Vec{1.0, 0.0});

    // follower 1 of the chain study at t = 0: zero velocity and zero
    // integral, so s_1 = -reference velocity
    const NeighborView nb{{1.0, {2, 0}, {0, 1}}};
    const Vec qdot_r = reference_velocity({3, 2}, nb, {0, 0}, 1.0);
    CHECK(sliding_vector({0, 0}, qdot_r) == vec_scale(-1.0, qdot_r));
    CHECK(sliding_vector({0, 0}, qdot_r) == Vec{1.0, 2.0});
}

TEST_CASE("control_torque") {
    const PlanarMassDamper md(1.5, 0.5);
    const Mat k20 = 20.0 * Mat::identity(2);

    SECTION("zero estimate leaves pure feedback") {
        const Vec tau = control_torque(md, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0.3, -0.1},
                                       {0.0, 0.0}, k20);
        CHECK(norm_inf(vec_sub(tau, {-6.0, 2.0})) < 1e-12);
    }
    SECTION("certainty equivalence on the sliding surface") {
        std::mt19937_64 rng(4);
        for (int rep = 0; rep < 100; ++rep) {
            const Vec q = random_vec(rng, 2), qdot = random_vec(rng, 2);
            const Vec qdot_r = random_vec(rng, 2), qddot_r = random_vec(rng, 2);
            const Vec tau = control_torque(md, q, qdot, qdot_r, qddot_r, {0, 0},
                                           md.true_params(), k20);
            const Vec exact = inverse_dynamics(md, q, qdot, qdot_r, qddot_r);
            CHECK(norm_inf(vec_sub(tau, exact)) < 1e-12);
        }
    }
    SECTION("hand evaluation") {
        const Vec tau = control_torque(md, {0, 0}, {0, 0}, {2, 0}, {1, 0}, {0.1, 0},
                                       {1.5, 0.5}, k20);
        CHECK_THAT(tau[0], Catch::Matchers::WithinAbs(0.5, 1e-15));
        CHECK_THAT(tau[1], Catch::Matchers::WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("adaptation_rate") {
    const PlanarMassDamper md(1.5, 0.5);
    const Mat gamma = 2.0 * Mat::identity(2);

    SECTION("freezes on the sliding surface") {
        CHECK(adaptation_rate(md, {1, 1}, {1, 0}, {0, 1}, {1, 0}, {0, 0}, gamma) ==
              Vec{0.0, 0.0});
    }
    SECTION("hand evaluation") {
        CHECK(adaptation_rate(md, {0, 0}, {0, 0}, {0, 1}, {1, 0}, {1, 0}, gamma) ==
              Vec{-2.0, 0.0});
    }
    SECTION("scaling Gamma scales the rate exactly") {
        std::mt19937_64 rng(8);
        for (int rep = 0; rep < 50; ++rep) {
            const Vec q = random_vec(rng, 2), qdot = random_vec(rng, 2);
            const Vec qdot_r = random_vec(rng, 2), qddot_r = random_vec(rng, 2);
            const Vec s = random_vec(rng, 2);
            const Vec r1 = adaptation_rate(md, q, qdot, qdot_r, qddot_r, s, gamma);
            const Vec r4 = adaptation_rate(md, q, qdot, qdot_r, qddot_r, s, 4.0 * gamma);
            CHECK(r4 == vec_scale(4.0, r1));
        }
    }
}

TEST_CASE("closed-loop identity M sdot + C s = -K s + Y da") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    const TwoLinkArm arm;
    for (int rep = 0; rep < 400; ++rep) {
        const PlanarMassDamper md(0.5 + 0.01 * (rep % 200), 0.1 + 0.004 * (rep % 200));
        const AgentModel& model = (rep % 2 == 0) ? static_cast<const AgentModel&>(md)
                                                 : static_cast<const AgentModel&>(arm);
        const double alpha = (rep % 3 == 0) ? 0.25 : (rep % 3 == 1) ? 1.0 : 4.0;
        const Vec q = random_vec(rng, 2), qdot = random_vec(rng, 2), q_int = random_vec(rng, 2);
        const Vec a_hat = random_vec(rng, model.param_dim());
        NeighborView nb;
        for (int k = 0; k <= rep % 3; ++k)
            nb.push_back({weight(rng), random_vec(rng, 2), random_vec(rng, 2)});
        const Mat feedback = (5.0 + rep % 26) * Mat::identity(2);

        const Vec qdot_r = reference_velocity(q, nb, q_int, alpha);
        const Vec qddot_r = reference_acceleration(q, qdot, nb, alpha);
        const Vec s = sliding_vector(qdot, qdot_r);
        const Vec tau = control_torque(model, q, qdot, qdot_r, qddot_r, s, a_hat, feedback);
        const Vec qddot = forward_dynamics(model, q, qdot, tau);

        // sdot from its defining sum, not from qddot_r
        Vec sdot = qddot;
        for (int c = 0; c < 2; ++c) {
            for (const Neighbor& nbj : nb) sdot[c] += nbj.weight * (qdot[c] - nbj.qdot[c]);
            sdot[c] += alpha * q[c];
        }

        Vec lhs = model.mass_matrix(q) * sdot;
        vec_axpy(1.0, model.coriolis_matrix(q, qdot) * s, lhs);

        Vec rhs = model.regressor(q, qdot, qdot_r, qddot_r) * vec_sub(a_hat, model.true_params());
        vec_axpy(-1.0, feedback * s, rhs);

        CHECK(norm_inf(vec_sub(lhs, rhs)) < 1e-9);
    }
}
