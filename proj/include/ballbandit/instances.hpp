#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ballbandit/environment.hpp"

namespace ballbandit {

// theta* uniform on the unit sphere.
inline BanditInstance gen_random_unit(int d, double sigma, RandomSource& rng) {
    BanditInstance inst;
    inst.theta_star = random_unit_vector(d, rng);
    inst.noise_sigma = sigma;
    return inst;
}

// theta* at a prescribed norm, uniform direction.
inline BanditInstance gen_scaled(int d, double norm, double sigma, RandomSource& rng) {
    if (!(norm > 0.0)) throw std::domain_error("gen_scaled: norm must be positive");
    BanditInstance inst;
    inst.theta_star = norm * random_unit_vector(d, rng);
    inst.noise_sigma = sigma;
    return inst;
}

// Orthonormal basis whose first column is h; remaining columns complete it
// from random directions via Gram-Schmidt.
inline Eigen::MatrixXd hint_adapted_basis(const Vec& h, RandomSource& rng) {
    const Eigen::Index d = h.size();
    Eigen::MatrixXd basis(d, d);
    basis.col(0) = h / h.norm();
    for (Eigen::Index c = 1; c < d; ++c) {
        Vec v;
        double vn = 0.0;
        do {
            v = random_unit_vector(d, rng);
            for (Eigen::Index j = 0; j < c; ++j) v -= v.dot(basis.col(j)) * basis.col(j);
            vn = v.norm();
        } while (vn < 1e-8);
        basis.col(c) = v / vn;
    }
    return basis;
}

// Axis-perturbation family around theta_0 = rho h: the center plus
// theta_0 +- Delta e_i for each basis direction e_i orthogonal to h,
// 2(d-1)+1 instances in total. Requires rho^2 + Delta^2 <= 1.
inline std::vector<BanditInstance> gen_pareto_family(const Vec& h, double rho, double Delta,
                                                     int d, double sigma, RandomSource& rng) {
    if (h.size() != d) throw std::domain_error("gen_pareto_family: hint dimension mismatch");
    if (std::abs(h.norm() - 1.0) > 1e-9)
        throw std::domain_error("gen_pareto_family: hint must be unit norm");
    if (!(rho > 0.0)) throw std::domain_error("gen_pareto_family: rho must be positive");
    if (Delta < 0.0) throw std::domain_error("gen_pareto_family: Delta must be >= 0");
    if (rho * rho + Delta * Delta > 1.0 + 1e-12)
        throw std::domain_error("gen_pareto_family: rho^2 + Delta^2 must not exceed 1");
    const Eigen::MatrixXd basis = hint_adapted_basis(h, rng);
    std::vector<BanditInstance> family;
    family.reserve(static_cast<std::size_t>(2 * (d - 1) + 1));
    BanditInstance center;
    center.theta_star = rho * basis.col(0);
    center.noise_sigma = sigma;
    family.push_back(center);
    for (int i = 1; i < d; ++i) {
        for (const double sgn : {+1.0, -1.0}) {
            BanditInstance m;
            m.theta_star = rho * basis.col(0) + sgn * Delta * basis.col(i);
            m.noise_sigma = sigma;
            if (m.theta_star.norm() > 1.0 + 1e-12)
                throw std::logic_error("gen_pareto_family: member norm exceeds 1");
            family.push_back(std::move(m));
        }
    }
    return family;
}

// Cube-corner instance (theta, s_1 Delta/sqrt(d), ..., s_d Delta/sqrt(d)) in
// dimension d+1. Requires theta^2 + Delta^2 <= 1 and |signs| = d.
inline BanditInstance gen_cube_family(double theta, double Delta, int d,
                                      const std::vector<int>& signs, double sigma) {
    if (static_cast<int>(signs.size()) != d)
        throw std::domain_error("gen_cube_family: signs must have length d");
    if (theta * theta + Delta * Delta > 1.0 + 1e-12)
        throw std::domain_error("gen_cube_family: theta^2 + Delta^2 must not exceed 1");
    const double bar = Delta / std::sqrt(static_cast<double>(d));
    BanditInstance inst;
    inst.theta_star = Vec(d + 1);
    inst.theta_star[0] = theta;
    for (int i = 0; i < d; ++i) {
        if (signs[static_cast<std::size_t>(i)] != 1 && signs[static_cast<std::size_t>(i)] != -1)
            throw std::domain_error("gen_cube_family: signs must be +-1");
        inst.theta_star[i + 1] = signs[static_cast<std::size_t>(i)] * bar;
    }
    inst.noise_sigma = sigma;
    return inst;
}

// theta* = h/2 + v with v uniform in the Delta-ball; h lives in R^{d+1}
// (the output dimension is one more than the d argument). Guarantees
// ||a* - h|| <= 4 Delta and r(a*, h) <= 972 Delta^2, asserted post-generation.
inline BanditInstance gen_near_hint(const Vec& h, double Delta, int d, double sigma,
                                    RandomSource& rng) {
    if (h.size() != d + 1) throw std::domain_error("gen_near_hint: h must live in R^{d+1}");
    if (std::abs(h.norm() - 1.0) > 1e-9)
        throw std::domain_error("gen_near_hint: hint must be unit norm");
    if (!(Delta >= 0.0 && Delta <= 0.25))
        throw std::domain_error("gen_near_hint: Delta must lie in [0, 1/4]");
    const Eigen::Index dim = h.size();
    Vec v = Vec::Zero(dim);
    if (Delta > 0.0) {
        const double radius =
            Delta * std::pow(rng.uniform01_open0(), 1.0 / static_cast<double>(dim));
        v = radius * random_unit_vector(dim, rng);
    }
    BanditInstance inst;
    inst.theta_star = 0.5 * h + v;
    inst.noise_sigma = sigma;
    const Vec astar = inst.optimal_action();
    if ((astar - h).norm() > 4.0 * Delta + 1e-12)
        throw std::logic_error("gen_near_hint: ||a*-h|| bound violated");
    if (instantaneous_regret(inst, h) > 972.0 * Delta * Delta + 1e-12)
        throw std::logic_error("gen_near_hint: hint regret bound violated");
    return inst;
}

// Unit hint whose instantaneous regret matches target_r_h to 1e-6 ||theta*||,
// found by bisecting the rotation angle away from a* in a random plane.
inline Vec gen_hint_of_quality(const BanditInstance& inst, double target_r_h, RandomSource& rng) {
    const double tn = inst.theta_norm();
    if (!(target_r_h >= 0.0 && target_r_h <= 2.0 * tn + 1e-12))
        throw std::domain_error("gen_hint_of_quality: target outside [0, 2||theta*||]");
    const Vec astar = inst.optimal_action();
    const Eigen::Index d = astar.size();
    if (target_r_h <= 0.0) return astar;
    if (d < 2) throw std::domain_error("gen_hint_of_quality: rotation needs d >= 2");
    Vec u;
    double un = 0.0;
    do {
        u = random_unit_vector(d, rng);
        u -= u.dot(astar) * astar;
        un = u.norm();
    } while (un < 1e-8);
    u /= un;
    auto hint_at = [&](double phi) { return Vec(std::cos(phi) * astar + std::sin(phi) * u); };
    double lo = 0.0, hi = 3.14159265358979323846;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (instantaneous_regret(inst, hint_at(mid)) < target_r_h)
            lo = mid;
        else
            hi = mid;
        if (std::abs(instantaneous_regret(inst, hint_at(0.5 * (lo + hi))) - target_r_h) <=
            1e-7 * tn)
            break;
    }
    return hint_at(0.5 * (lo + hi));
}

}  // namespace ballbandit
