#pragma once

#include <Eigen/Core>

#include "ballbandit/errors.hpp"
#include "ballbandit/rng.hpp"

namespace ballbandit {

using Vec = Eigen::VectorXd;

// Absolute slack on unit-ball membership.
inline constexpr double kBallSlack = 1e-12;
// Slack on orthogonality preconditions, relative to the norms involved.
inline constexpr double kOrthSlack = 1e-10;

// An action on the closed unit ball; construction validates membership.
class ActionVec {
  public:
    ActionVec() = default;
    explicit ActionVec(Vec v) : v_(std::move(v)) {
        if (v_.norm() > 1.0 + kBallSlack)
            throw std::domain_error("ActionVec: norm exceeds the unit ball");
    }

    const Vec& vec() const { return v_; }
    double norm() const { return v_.norm(); }
    Eigen::Index dim() const { return v_.size(); }

  private:
    Vec v_;
};

// P_v u = <u,v> v / ||v||^2. Throws on v = 0.
inline Vec project_onto(const Vec& u, const Vec& v) {
    const double v2 = v.squaredNorm();
    if (v2 == 0.0) throw std::domain_error("project_onto: zero reference vector");
    return (u.dot(v) / v2) * v;
}

// P^perp_v u = u - P_v u. Throws on v = 0.
inline Vec project_orth(const Vec& u, const Vec& v) {
    const double v2 = v.squaredNorm();
    if (v2 == 0.0) throw std::domain_error("project_orth: zero reference vector");
    return u - (u.dot(v) / v2) * v;
}

// (h + p) / sqrt(||h||^2 + ||p||^2), renormalized to exactly unit length.
// Requires ||h|| in {0, 1}, <p,h> = 0, and p != 0 when h = 0.
inline ActionVec perturb(const ActionVec& h, const Vec& p) {
    const double hn = h.norm();
    const double pn = p.norm();
    if (hn > kBallSlack && std::abs(hn - 1.0) > 1e-9)
        throw std::domain_error("perturb: reference action must be zero or unit");
    if (hn <= kBallSlack && pn == 0.0)
        throw std::domain_error("perturb: zero hint requires a nonzero perturbation");
    if (std::abs(p.dot(h.vec())) > kOrthSlack * std::max(1.0, pn * hn))
        throw std::domain_error("perturb: perturbation not orthogonal to the hint");
    Vec a = h.vec() + p;
    a /= a.norm();  // equals (h+p)/sqrt(||h||^2+||p||^2) up to rounding
    return ActionVec(std::move(a));
}

// Draw from N_h(0, variance_scale / d') = N(0, (variance_scale/d') (I - h h^T/||h||^2)),
// where d' = d - 1{h != 0}. For h = 0 the projector is the identity and d' = d.
inline Vec sample_projected_gaussian(const Vec& h, double variance_scale, RandomSource& rng) {
    if (variance_scale < 0.0)
        throw std::domain_error("sample_projected_gaussian: negative variance scale");
    const Eigen::Index d = h.size();
    const bool has_h = h.squaredNorm() > 0.0;
    const Eigen::Index dprime = d - (has_h ? 1 : 0);
    Vec g(d);
    if (variance_scale == 0.0) {
        g.setZero();
        return g;
    }
    const double sigma = std::sqrt(variance_scale / static_cast<double>(dprime));
    for (Eigen::Index i = 0; i < d; ++i) g[i] = sigma * rng.normal();
    if (has_h) g -= (g.dot(h) / h.squaredNorm()) * h;
    return g;
}

// Unit vector in a uniformly random direction.
inline Vec random_unit_vector(Eigen::Index d, RandomSource& rng) {
    Vec v(d);
    double n2;
    do {
        for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
        n2 = v.squaredNorm();
    } while (n2 == 0.0);
    return v / std::sqrt(n2);
}

}  // namespace ballbandit
