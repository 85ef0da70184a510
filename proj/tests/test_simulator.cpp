#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "oscsync/analysis.hpp"
#include "oscsync/scenario_io.hpp"
#include "oscsync/simulator.hpp"

using namespace oscsync;

namespace {

Scenario single_follower_scenario() {
    Scenario sc;
    sc.topology = DirectedTopology::chain(1);
    sc.alpha = 1.0;
    sc.leader_q0 = {2.0, 0.0};
    sc.leader_qdot0 = {0.0, 1.0};
    sc.models = {std::make_shared<PlanarMassDamper>(1.5, 0.5)};
    sc.gains = {Gains::scaled_identity(2, 2, 20.0, 2.0)};
    sc.follower_init = {{{2.0, 0.0}, {0.0, 1.0}}};
    sc.a_hat_init = {{1.5, 0.5}};
    sc.dt = 0.005;
    sc.t_final = 1.0;
    sc.record_stride = 1;
    return sc;
}

double max_state_diff(const Trajectory& a, const Trajectory& b) {
    REQUIRE(a.samples.size() == b.samples.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        const auto& fa = a.samples[k].followers;
        const auto& fb = b.samples[k].followers;
        for (std::size_t i = 0; i < fa.size(); ++i) {
            worst = std::max(worst, norm_inf(vec_sub(fa[i].q, fb[i].q)));
            worst = std::max(worst, norm_inf(vec_sub(fa[i].qdot, fb[i].qdot)));
            worst = std::max(worst, norm_inf(vec_sub(fa[i].a_hat, fb[i].a_hat)));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("scenario validation") {
    Scenario sc = single_follower_scenario();
    CHECK_NOTHROW(sc.validate());

    SECTION("list length mismatches") {
        sc.models.clear();
        CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    }
    SECTION("dimension mismatches") {
        sc.leader_q0 = {1.0};
        CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    }
    SECTION("bad step settings") {
        sc.dt = 0.0;
        CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
        sc.dt = 0.005;
        sc.record_stride = 0;
        CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    }
    SECTION("strict mode rejects indefinite gains") {
        sc.gains[0].feedback = Mat(2, 2);
        CHECK_NOTHROW(sc.validate());
        CHECK_THROWS_AS(sc.validate(/*strict=*/true), std::invalid_argument);
    }
    SECTION("q_int override is accepted") {
        sc.q_int_init = {{0.0, -1.0}};
        CHECK_NOTHROW(sc.validate());
    }
}

TEST_CASE("synchronized manifold is an equilibrium of the error system") {
    // follower starts exactly on the leader orbit with true parameters and
    // the integral state at its steady value -qdot0(0)/alpha
    Scenario sc = single_follower_scenario();
    sc.q_int_init = {{0.0, -1.0}};
    sc.t_final = 1.0;
    const Trajectory traj = run(sc);
    REQUIRE(traj.samples.size() == 201);
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        const auto& sample = traj.samples[k];
        const double budget = 1e-8 * static_cast<double>(k + 1);
        CHECK(norm_inf(vec_sub(sample.followers[0].q, sample.leader.q)) < budget);
        CHECK(norm_inf(vec_sub(sample.followers[0].qdot, sample.leader.qdot)) < budget);
        CHECK(norm2(sample.followers[0].s) < budget);
    }
}

TEST_CASE("zero gains, no edges: followers integrate their own oscillators") {
    // with a_hat = a, c = 0 and no neighbor terms the torque reduces to
    // m qddot_r = -m alpha q, so each follower is an independent oscillator
    Scenario sc;
    sc.topology = DirectedTopology(2, Mat(3, 3));  // no edges at all
    sc.alpha = 1.0;
    sc.leader_q0 = {2.0, 0.0};
    sc.leader_qdot0 = {0.0, 1.0};
    sc.models = {std::make_shared<PlanarMassDamper>(1.2, 0.0),
                 std::make_shared<PlanarMassDamper>(0.7, 0.0)};
    sc.gains = {Gains{Mat(2, 2), Mat(2, 2)}, Gains{Mat(2, 2), Mat(2, 2)}};
    sc.follower_init = {{{1.0, -0.5}, {0.3, 0.2}}, {{-2.0, 0.4}, {0.0, -1.0}}};
    sc.a_hat_init = {{1.2, 0.0}, {0.7, 0.0}};
    sc.dt = 0.001;
    sc.t_final = 10.0;
    sc.record_stride = 100;

    const Trajectory traj = run(sc);
    CHECK_FALSE(traj.warnings.empty());  // no spanning tree
    for (const auto& sample : traj.samples) {
        for (int i = 0; i < 2; ++i) {
            const LeaderState ref = leader_closed_form(sample.t, sc.follower_init[i].q,
                                                       sc.follower_init[i].qdot, sc.alpha);
            CHECK(norm_inf(vec_sub(sample.followers[i].q, ref.q)) < 1e-6);
            CHECK(norm_inf(vec_sub(sample.followers[i].qdot, ref.qdot)) < 1e-6);
            // adaptation is frozen
            CHECK(sample.followers[i].a_hat == sc.a_hat_init[i]);
        }
    }
}

TEST_CASE("one RK4 step vs two half steps: fifth-order local error") {
    Scenario sc = paper_scenario();
    sc.t_final = 0.2;
    sc.record_stride = 1;

    // state after the initial transient has developed a bit
    NetworkState state = NetworkState::initial(sc);
    double t = 0.0;
    for (int k = 0; k < 20; ++k, t += sc.dt) state = step(sc, state, t);

    auto local_error = [&](double h) {
        Scenario full = sc, half = sc;
        full.dt = h;
        half.dt = 0.5 * h;
        const NetworkState one = step(full, state, t);
        const NetworkState two = step(half, step(half, state, t), t + 0.5 * h);
        double err = 0.0;
        for (std::size_t j = 0; j < one.x.size(); ++j)
            err = std::max(err, std::abs(one.x[j] - two.x[j]));
        return err;
    };

    const double e1 = local_error(0.02);
    const double e2 = local_error(0.01);
    CHECK(e1 / e2 > 20.0);
    CHECK(e1 / e2 < 45.0);
}

TEST_CASE("t_final = 0 gives a single-sample trajectory") {
    Scenario sc = single_follower_scenario();
    sc.t_final = 0.0;
    const Trajectory traj = run(sc);
    REQUIRE(traj.samples.size() == 1);
    CHECK(traj.samples[0].t == 0.0);
    CHECK(traj.samples[0].followers[0].q == sc.follower_init[0].q);
}

TEST_CASE("sample count follows floor(t_final / (dt stride)) + 1") {
    Scenario sc = single_follower_scenario();
    sc.dt = 0.1;
    sc.record_stride = 2;
    sc.t_final = 0.95;
    CHECK(run(sc).samples.size() == 5);  // floor(4.75) + 1
    sc.t_final = 60.0;
    sc.dt = 0.005;
    sc.record_stride = 10;
    CHECK(run(sc).samples.size() == 1201);
}

TEST_CASE("divergence is reported with agent and time") {
    Scenario sc = paper_scenario();
    sc.dt = 0.5;  // far beyond the stability limit of the stiff gains
    sc.t_final = 50.0;
    try {
        run(sc);
        FAIL("expected SimulationDivergedError");
    } catch (const SimulationDivergedError& e) {
        CHECK(e.agent_index >= 1);
        CHECK(e.agent_index <= 9);
        CHECK(e.time_s > 0.0);
        CHECK(std::string(e.what()).find("follower") != std::string::npos);
    }
}

TEST_CASE("identical scenarios give bit-identical trajectories") {
    Scenario sc = paper_scenario();
    sc.t_final = 2.0;
    const Trajectory a = run(sc);
    const Trajectory b = run(sc);
    CHECK(max_state_diff(a, b) == 0.0);
}

TEST_CASE("total Lyapunov function is nonincreasing") {
    Scenario sc = paper_scenario();
    sc.t_final = 10.0;
    const Trajectory traj = run(sc);
    double v_prev = 0.0;
    for (const auto& f : traj.samples.front().followers) v_prev += f.lyapunov;
    const double tol = 1e-6 * std::max(1.0, v_prev);
    for (std::size_t k = 1; k < traj.samples.size(); ++k) {
        double v = 0.0;
        for (const auto& f : traj.samples[k].followers) v += f.lyapunov;
        CHECK(v <= v_prev + tol);
        v_prev = v;
    }
}

TEST_CASE("sliding vectors stay within their initial Lyapunov bound") {
    Scenario sc = paper_scenario();
    sc.t_final = 10.0;
    const Trajectory traj = run(sc);
    for (int i = 0; i < traj.n; ++i) {
        const auto* md = dynamic_cast<const PlanarMassDamper*>(sc.models[i].get());
        REQUIRE(md != nullptr);
        const double bound =
            std::sqrt(2.0 * traj.samples.front().followers[i].lyapunov / md->mass()) + 1e-9;
        for (const auto& sample : traj.samples) CHECK(norm2(sample.followers[i].s) <= bound);
    }
}

TEST_CASE("halving dt barely moves the final state") {
    Scenario sc = paper_scenario();
    sc.t_final = 5.0;
    const Trajectory coarse = run(sc);
    sc.dt = 0.0025;
    sc.record_stride = 20;
    const Trajectory fine = run(sc);
    REQUIRE(coarse.samples.size() == fine.samples.size());
    const auto& a = coarse.samples.back();
    const auto& b = fine.samples.back();
    for (int i = 0; i < coarse.n; ++i)
        CHECK(norm_inf(vec_sub(a.followers[i].q, b.followers[i].q)) < 1e-6);
}

TEST_CASE("zero-order-hold Euler mode") {
    // first-order scheme: the frozen torque leaves a persistent O(dt)
    // tracking bias (about 0.09 at 5 ms, 0.017 at 1 ms)
    Scenario sc = paper_scenario();
    sc.t_final = 60.0;
    sc.integrator = IntegratorMode::zoh_euler;
    const Trajectory coarse = run(sc);
    const SyncReport coarse_rep = compute_sync_report(coarse, 0.05);
    CHECK_FALSE(coarse_rep.converged);
    CHECK(coarse_rep.final_e_q < 0.15);

    sc.dt = 0.001;
    sc.record_stride = 50;
    const SyncReport fine_rep = compute_sync_report(run(sc), 0.05);
    CHECK(fine_rep.converged);
    const double ratio = coarse_rep.final_e_q / fine_rep.final_e_q;
    CHECK(ratio > 3.0);
    CHECK(ratio < 8.0);

    // and it is genuinely a different scheme from RK4
    Scenario rk = paper_scenario();
    rk.t_final = 60.0;
    CHECK(max_state_diff(coarse, run(rk)) > 1e-9);
}

TEST_CASE("broken topology keeps running but does not synchronize") {
    Scenario sc = with_broken_tree(paper_scenario());
    sc.t_final = 30.0;
    const Trajectory traj = run(sc);
    CHECK_FALSE(traj.warnings.empty());
    const SyncReport rep = compute_sync_report(traj, 0.05);
    CHECK_FALSE(rep.converged);
    CHECK(rep.final_e_q > 0.1);
}
