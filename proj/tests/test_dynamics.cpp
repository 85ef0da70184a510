#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oscsync/dynamics.hpp"

using namespace oscsync;

namespace {

Vec random_vec(std::mt19937_64& rng, int m, double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vec v(m);
    for (double& x : v) x = dist(rng);
    return v;
}

// deliberately broken model: indefinite "mass matrix"
class IndefiniteModel final : public AgentModel {
public:
    int dof() const override { return 2; }
    int param_dim() const override { return 1; }
    std::string name() const override { return "indefinite"; }
    Mat mass_matrix(const Vec&) const override { return Mat{{1, 2}, {2, 1}}; }
    Mat coriolis_matrix(const Vec&, const Vec&) const override { return Mat(2, 2); }
    Vec gravity(const Vec&) const override { return Vec(2, 0.0); }
    Mat regressor(const Vec&, const Vec&, const Vec&, const Vec& zdot) const override {
        Mat y(2, 1);
        y(0, 0) = zdot[0];
        y(1, 0) = zdot[1];
        return y;
    }
    Vec true_params() const override { return {1.0}; }
};

}  // namespace

TEST_CASE("inverse_dynamics") {
    SECTION("hand value for the damped point mass") {
        const PlanarMassDamper md(2.0, 0.5);
        const Vec tau = inverse_dynamics(md, {0, 0}, {0, 0}, {0, 2}, {1, 0});
        CHECK(tau[0] == 2.0);
        CHECK(tau[1] == 1.0);
    }
    SECTION("zero test vectors leave only gravity") {
        const TwoLinkArm arm;
        const Vec q{0.3, -1.1};
        const Vec tau = inverse_dynamics(arm, q, {0.5, 0.2}, {0, 0}, {0, 0});
        CHECK(norm_inf(vec_sub(tau, arm.gravity(q))) == 0.0);
    }
    SECTION("dimension mismatch is rejected") {
        const PlanarMassDamper md(1.0, 0.1);
        CHECK_THROWS_AS(inverse_dynamics(md, {0, 0, 0}, {0, 0}, {0, 0}, {0, 0}),
                        std::invalid_argument);
    }
}

TEST_CASE("regressor identity: inverse dynamics = Y a") {
    std::mt19937_64 rng(314);
    std::uniform_real_distribution<double> mass(0.5, 2.5), damping(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const PlanarMassDamper md(mass(rng), damping(rng));
        const TwoLinkArm arm;
        for (const AgentModel* model : {static_cast<const AgentModel*>(&md),
                                        static_cast<const AgentModel*>(&arm)}) {
            const Vec q = random_vec(rng, 2), qdot = random_vec(rng, 2);
            const Vec z = random_vec(rng, 2), zdot = random_vec(rng, 2);
            const Vec lhs = inverse_dynamics(*model, q, qdot, z, zdot);
            const Vec rhs = model->regressor(q, qdot, z, zdot) * model->true_params();
            CHECK(norm_inf(vec_sub(lhs, rhs)) < 1e-10);
        }
    }
}

TEST_CASE("forward_dynamics") {
    SECTION("torque cancelling the damping gives zero acceleration") {
        const PlanarMassDamper md(1.0, 0.3);
        const Vec qdd = forward_dynamics(md, {0, 0}, {1, 1}, {0.3, 0.3});
        CHECK(norm_inf(qdd) < 1e-15);
    }
    SECTION("undamped point mass obeys Newton's law") {
        const PlanarMassDamper md(2.0, 0.0);
        const Vec qdd = forward_dynamics(md, {0, 0}, {0, 0}, {4, 0});
        CHECK_THAT(qdd[0], Catch::Matchers::WithinAbs(2.0, 1e-14));
        CHECK(qdd[1] == 0.0);
    }
    SECTION("arm at rest under gravity-compensating torque stays at rest") {
        const TwoLinkArm arm;
        const Vec q{0.7, 0.4};
        const Vec qdd = forward_dynamics(arm, q, {0, 0}, arm.gravity(q));
        CHECK(norm_inf(qdd) == 0.0);
    }
    SECTION("lost positive definiteness is reported") {
        const IndefiniteModel broken;
        CHECK_THROWS_AS(forward_dynamics(broken, {0, 0}, {0, 0}, {1, 1}), std::runtime_error);
    }
}

TEST_CASE("forward then inverse dynamics round-trip") {
    std::mt19937_64 rng(2718);
    const TwoLinkArm arm;
    for (int rep = 0; rep < 200; ++rep) {
        const Vec q = random_vec(rng, 2), qdot = random_vec(rng, 2), tau = random_vec(rng, 2);
        const Vec qdd = forward_dynamics(arm, q, qdot, tau);
        const Vec back = inverse_dynamics(arm, q, qdot, qdot, qdd);
        CHECK(norm_inf(vec_sub(back, tau)) < 1e-10);
    }
}

TEST_CASE("mass matrix is symmetric positive definite") {
    std::mt19937_64 rng(99);
    const TwoLinkArm arm;
    const PlanarMassDamper md(1.5, 0.5);
    for (int rep = 0; rep < 300; ++rep) {
        for (const AgentModel* model : {static_cast<const AgentModel*>(&md),
                                        static_cast<const AgentModel*>(&arm)}) {
            const Mat m = model->mass_matrix(random_vec(rng, 2, -3.2, 3.2));
            CHECK(is_symmetric(m, 0.0));
            REQUIRE(cholesky_lower(m).has_value());
            for (const Complex& l : eigenvalues(m)) CHECK(l.real() > 0.0);
        }
    }
}

TEST_CASE("two-link arm: Mdot - 2C is skew-symmetric") {
    std::mt19937_64 rng(7);
    const TwoLinkArm arm;
    for (int rep = 0; rep < 300; ++rep) {
        const Vec q = random_vec(rng, 2), qdot = random_vec(rng, 2), x = random_vec(rng, 2);
        const Mat c2 = 2.0 * arm.coriolis_matrix(q, qdot);
        CHECK(std::abs(quadratic_form(x, arm.mass_matrix_rate(q, qdot) - c2)) < 1e-12);
        CHECK(std::abs(quadratic_form(x, arm.mass_matrix_rate_fd(q, qdot, 1e-6) - c2)) < 1e-8);
    }
}

TEST_CASE("mass-damper dissipativity is exact") {
    std::mt19937_64 rng(55);
    for (int rep = 0; rep < 300; ++rep) {
        const PlanarMassDamper md(0.5 + rep % 3, 0.1 * (1 + rep % 9));
        const Vec q = random_vec(rng, 2), qdot = random_vec(rng, 2), x = random_vec(rng, 2);
        const Mat a = md.mass_matrix_rate(q, qdot) - 2.0 * md.coriolis_matrix(q, qdot);
        const double qf = quadratic_form(x, a);
        const double c2 = -2.0 * md.damping();
        CHECK(qf <= 0.0);
        CHECK(qf == x[0] * (c2 * x[0]) + x[1] * (c2 * x[1]));
    }
}

TEST_CASE("model construction guards") {
    CHECK_THROWS_AS(PlanarMassDamper(0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(PlanarMassDamper(1.0, -0.1), std::invalid_argument);
    TwoLinkArm::Params p;
    p.gravity = 9.81;  // vertical-plane arm needs a larger parameter basis
    CHECK_THROWS_AS(TwoLinkArm(p), std::invalid_argument);
    p.gravity = 0.0;
    p.m2 = -1.0;
    CHECK_THROWS_AS(TwoLinkArm(p), std::invalid_argument);
}
