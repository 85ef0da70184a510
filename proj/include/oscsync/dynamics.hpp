#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "oscsync/matrix.hpp"

namespace oscsync {

/// Euler-Lagrange agent: M(q) qdd + C(q, qd) qd + g(q) = tau, with the
/// dynamics linear in a constant parameter vector through the regressor,
///   M(q) zd + C(q, qd) z + g(q) = Y(q, qd, z, zd) a.
/// Models are immutable; every operation is a pure function of its inputs.
class AgentModel {
public:
    virtual ~AgentModel() = default;

    virtual int dof() const = 0;
    virtual int param_dim() const = 0;
    virtual std::string name() const = 0;

    virtual Mat mass_matrix(const Vec& q) const = 0;
    virtual Mat coriolis_matrix(const Vec& q, const Vec& qdot) const = 0;
    virtual Vec gravity(const Vec& q) const = 0;
    virtual Mat regressor(const Vec& q, const Vec& qdot, const Vec& z, const Vec& zdot) const = 0;
    virtual Vec true_params() const = 0;

    /// dM/dt along qdot. Default is a central finite difference with step
    /// 1e-6; models with a cheap analytic form override it.
    virtual Mat mass_matrix_rate(const Vec& q, const Vec& qdot) const {
        return mass_matrix_rate_fd(q, qdot, 1e-6);
    }

    Mat mass_matrix_rate_fd(const Vec& q, const Vec& qdot, double step) const {
        Vec qp = q, qm = q;
        vec_axpy(step, qdot, qp);
        vec_axpy(-step, qdot, qm);
        return (1.0 / (2.0 * step)) * (mass_matrix(qp) - mass_matrix(qm));
    }

protected:
    void check_dim(const Vec& v, const char* what) const {
        if (static_cast<int>(v.size()) != dof())
            throw std::invalid_argument(std::string(name()) + ": " + what + " has wrong dimension");
    }
};

using AgentModelPtr = std::shared_ptr<const AgentModel>;

/// M(q) z + C(q, qd) z... evaluated as M zdot + C z + g.
inline Vec inverse_dynamics(const AgentModel& model, const Vec& q, const Vec& qdot, const Vec& z,
                            const Vec& zdot) {
    Vec tau = model.mass_matrix(q) * zdot;
    const Vec cz = model.coriolis_matrix(q, qdot) * z;
    const Vec g = model.gravity(q);
    for (std::size_t i = 0; i < tau.size(); ++i) tau[i] += cz[i] + g[i];
    return tau;
}

/// qdd = M(q)^{-1} (tau - C qd - g), via Cholesky of M. A failed
/// factorization means the model lost positive definiteness.
inline Vec forward_dynamics(const AgentModel& model, const Vec& q, const Vec& qdot, const Vec& tau) {
    Vec rhs = tau;
    const Vec cq = model.coriolis_matrix(q, qdot) * qdot;
    const Vec g = model.gravity(q);
    if (rhs.size() != cq.size()) throw std::invalid_argument("forward_dynamics: dimension mismatch");
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= cq[i] + g[i];
    const auto chol = cholesky_lower(model.mass_matrix(q));
    if (!chol)
        throw std::runtime_error("forward_dynamics: mass matrix of " + model.name() +
                                 " is not positive definite");
    return cholesky_solve(*chol, std::move(rhs));
}

/// Point mass in the plane with linear viscous damping:
/// m qdd + c qd = tau. The damping sits in the C-slot, so the model is
/// dissipative rather than skew-symmetric. a = [m, c].
class PlanarMassDamper final : public AgentModel {
public:
    PlanarMassDamper(double mass, double damping) : mass_(mass), damping_(damping) {
        if (mass <= 0.0) throw std::invalid_argument("PlanarMassDamper: mass must be positive");
        if (damping < 0.0)
            throw std::invalid_argument("PlanarMassDamper: damping must be nonnegative");
    }

    int dof() const override { return 2; }
    int param_dim() const override { return 2; }
    std::string name() const override { return "mass-damper"; }

    double mass() const { return mass_; }
    double damping() const { return damping_; }

    Mat mass_matrix(const Vec& q) const override {
        check_dim(q, "q");
        return mass_ * Mat::identity(2);
    }

    Mat coriolis_matrix(const Vec& q, const Vec& qdot) const override {
        check_dim(q, "q");
        check_dim(qdot, "qdot");
        return damping_ * Mat::identity(2);
    }

    Vec gravity(const Vec& q) const override {
        check_dim(q, "q");
        return Vec(2, 0.0);
    }

    Mat regressor(const Vec& q, const Vec& qdot, const Vec& z, const Vec& zdot) const override {
        check_dim(q, "q");
        check_dim(qdot, "qdot");
        check_dim(z, "z");
        check_dim(zdot, "zdot");
        Mat y(2, 2);
        y(0, 0) = zdot[0];
        y(1, 0) = zdot[1];
        y(0, 1) = z[0];
        y(1, 1) = z[1];
        return y;
    }

    Vec true_params() const override { return {mass_, damping_}; }

    Mat mass_matrix_rate(const Vec&, const Vec&) const override { return Mat(2, 2); }

private:
    double mass_;
    double damping_;
};

/// Two-link arm moving in a horizontal plane, Coriolis matrix from
/// Christoffel symbols so Mdot - 2C is exactly skew-symmetric. Base
/// parameters a = [th1, th2, th3]:
///   th1 = m1 lc1^2 + m2 l1^2 + I1
///   th2 = m2 lc2^2 + I2
///   th3 = m2 l1 lc2
/// The three-parameter form only covers the gravity-free dynamics, so the
/// gravity constant must stay zero (vertical-plane arms would need five
/// base parameters).
class TwoLinkArm final : public AgentModel {
public:
    struct Params {
        double m1 = 1.0, m2 = 1.0;    // link masses
        double l1 = 1.0, l2 = 1.0;    // link lengths
        double lc1 = 0.5, lc2 = 0.5;  // center-of-mass offsets
        double i1 = 1.0 / 12.0, i2 = 1.0 / 12.0;  // link inertias about the COM
        double gravity = 0.0;
    };

    TwoLinkArm() : TwoLinkArm(Params{}) {}

    explicit TwoLinkArm(const Params& p) : p_(p) {
        if (p.m1 <= 0 || p.m2 <= 0 || p.l1 <= 0 || p.l2 <= 0 || p.lc1 < 0 || p.lc2 <= 0 ||
            p.i1 <= 0 || p.i2 <= 0)
            throw std::invalid_argument("TwoLinkArm: nonpositive physical parameter");
        if (p.gravity != 0.0)
            throw std::invalid_argument("TwoLinkArm: horizontal-plane model, gravity must be 0");
        th1_ = p.m1 * p.lc1 * p.lc1 + p.m2 * p.l1 * p.l1 + p.i1;
        th2_ = p.m2 * p.lc2 * p.lc2 + p.i2;
        th3_ = p.m2 * p.l1 * p.lc2;
    }

    int dof() const override { return 2; }
    int param_dim() const override { return 3; }
    std::string name() const override { return "two-link-arm"; }

    const Params& params() const { return p_; }

    Mat mass_matrix(const Vec& q) const override {
        check_dim(q, "q");
        const double c2 = std::cos(q[1]);
        Mat m(2, 2);
        m(0, 0) = th1_ + th2_ + 2.0 * th3_ * c2;
        m(0, 1) = m(1, 0) = th2_ + th3_ * c2;
        m(1, 1) = th2_;
        return m;
    }

    Mat coriolis_matrix(const Vec& q, const Vec& qdot) const override {
        check_dim(q, "q");
        check_dim(qdot, "qdot");
        const double h = -th3_ * std::sin(q[1]);
        Mat c(2, 2);
        c(0, 0) = h * qdot[1];
        c(0, 1) = h * (qdot[0] + qdot[1]);
        c(1, 0) = -h * qdot[0];
        c(1, 1) = 0.0;
        return c;
    }

    Vec gravity(const Vec& q) const override {
        check_dim(q, "q");
        return Vec(2, 0.0);
    }

    Mat regressor(const Vec& q, const Vec& qdot, const Vec& z, const Vec& zdot) const override {
        check_dim(q, "q");
        check_dim(qdot, "qdot");
        check_dim(z, "z");
        check_dim(zdot, "zdot");
        const double c2 = std::cos(q[1]);
        const double s2 = std::sin(q[1]);
        Mat y(2, 3);
        y(0, 0) = zdot[0];
        y(0, 1) = zdot[0] + zdot[1];
        y(0, 2) = 2.0 * c2 * zdot[0] + c2 * zdot[1] - s2 * qdot[1] * z[0] -
                  s2 * (qdot[0] + qdot[1]) * z[1];
        y(1, 0) = 0.0;
        y(1, 1) = zdot[0] + zdot[1];
        y(1, 2) = c2 * zdot[0] + s2 * qdot[0] * z[0];
        return y;
    }

    Vec true_params() const override { return {th1_, th2_, th3_}; }

    Mat mass_matrix_rate(const Vec& q, const Vec& qdot) const override {
        check_dim(q, "q");
        check_dim(qdot, "qdot");
        const double ds = -th3_ * std::sin(q[1]) * qdot[1];
        Mat m(2, 2);
        m(0, 0) = 2.0 * ds;
        m(0, 1) = m(1, 0) = ds;
        m(1, 1) = 0.0;
        return m;
    }

private:
    Params p_;
    double th1_, th2_, th3_;
};

}  // namespace oscsync
