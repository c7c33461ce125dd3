#include <doctest.h>

#include <cmath>

#include "ballbandit/vec.hpp"

using namespace ballbandit;

namespace {
Vec make_vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (const double x : xs) v[i++] = x;
    return v;
}
}  // namespace

TEST_CASE("project_onto axis examples") {
    CHECK((project_onto(make_vec({1, 1}), make_vec({1, 0})) - make_vec({1, 0})).norm() == 0.0);
    const Vec v = make_vec({0.3, -0.8, 0.1});
    CHECK((project_onto(v, v) - v).norm() < 1e-15);
    CHECK((project_onto(make_vec({3, 4}), make_vec({0, 2})) - make_vec({0, 4})).norm() == 0.0);
    CHECK_THROWS_AS(project_onto(make_vec({1, 1}), make_vec({0, 0})), std::domain_error);
}

TEST_CASE("project_orth axis examples") {
    CHECK((project_orth(make_vec({1, 1}), make_vec({1, 0})) - make_vec({0, 1})).norm() == 0.0);
    const Vec v = make_vec({2, -1, 0.5});
    CHECK(project_orth(3.0 * v, v).norm() < 1e-14);
    CHECK((project_orth(make_vec({3, 4}), make_vec({0, 2})) - make_vec({3, 0})).norm() == 0.0);
    CHECK_THROWS_AS(project_orth(make_vec({1, 1}), make_vec({0, 0})), std::domain_error);
}

TEST_CASE("projection decomposition and norm identities on random pairs") {
    RandomSource rng(11, 0);
    for (int it = 0; it < 1000; ++it) {
        const int d = 2 + static_cast<int>(rng.uniform_index(8));
        Vec u(d), v(d);
        for (int i = 0; i < d; ++i) {
            u[i] = rng.normal();
            v[i] = rng.normal();
        }
        if (v.norm() < 1e-6) continue;
        const Vec pu = project_onto(u, v);
        const Vec qu = project_orth(u, v);
        CHECK((pu + qu - u).norm() <= 1e-10 * std::max(1.0, u.norm()));
        CHECK(std::abs(qu.dot(v)) <= 1e-10 * u.norm() * v.norm() + 1e-300);
        // ||P_v u|| ||v|| = |<v,u>| and the symmetric orthogonal identity
        CHECK(std::abs(pu.norm() * v.norm() - std::abs(v.dot(u))) <=
              1e-9 * std::max(1.0, u.norm() * v.norm()));
        if (u.norm() > 1e-6) {
            const double lhs = project_orth(u, v).norm() * v.norm();
            const double rhs = project_orth(v, u).norm() * u.norm();
            CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, lhs));
        }
    }
}

TEST_CASE("perturb examples and unit-norm output") {
    const Vec h = make_vec({1, 0});
    CHECK((perturb(ActionVec(h), make_vec({0, 0})).vec() - h).norm() == 0.0);
    const ActionVec p1 = perturb(ActionVec(h), make_vec({0, 1}));
    CHECK(std::abs(p1.vec()[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(p1.vec()[1] - 1.0 / std::sqrt(2.0)) < 1e-15);
    const ActionVec p2 = perturb(ActionVec(make_vec({0, 0})), make_vec({0, 3}));
    CHECK((p2.vec() - make_vec({0, 1})).norm() < 1e-15);
    CHECK_THROWS_AS(perturb(ActionVec(h), make_vec({0.5, 1})), std::domain_error);
    CHECK_THROWS_AS(perturb(ActionVec(make_vec({0, 0})), make_vec({0, 0})), std::domain_error);

    RandomSource rng(3, 1);
    for (int it = 0; it < 300; ++it) {
        const int d = 2 + static_cast<int>(rng.uniform_index(10));
        const Vec hv = random_unit_vector(d, rng);
        Vec p = sample_projected_gaussian(hv, 0.25, rng);
        const ActionVec a = perturb(ActionVec(hv), p);
        CHECK(std::abs(a.norm() - 1.0) <= 1e-12);
    }
}

TEST_CASE("sample_projected_gaussian basics") {
    RandomSource rng(5, 9);
    const int d = 6;
    CHECK(sample_projected_gaussian(Vec(Vec::Zero(d)), 0.0, rng).norm() == 0.0);
    Vec axis = Vec::Zero(d);
    axis[0] = 1.0;
    for (int it = 0; it < 100; ++it) {
        const Vec g = sample_projected_gaussian(axis, 0.7, rng);
        CHECK(g[0] == 0.0);  // projector kernel, exact for an axis hint
    }
    // orthogonality within numeric slack for a generic hint
    const Vec h = random_unit_vector(d, rng);
    for (int it = 0; it < 100; ++it) {
        const Vec g = sample_projected_gaussian(h, 0.7, rng);
        CHECK(std::abs(g.dot(h)) <= 1e-12 * std::max(1.0, g.norm()));
    }
}

TEST_CASE("projected gaussian squared norm matches chi-square expectation") {
    // E ||p||^2 d'/Delta^2 = d', Monte Carlo to +-3%
    RandomSource rng(17, 4);
    const double delta2 = 0.09;
    for (const bool with_hint : {false, true}) {
        const int d = 8;
        const Vec h = with_hint ? random_unit_vector(d, rng) : Vec(Vec::Zero(d));
        const double dprime = with_hint ? d - 1 : d;
        double sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i)
            sum += sample_projected_gaussian(h, delta2, rng).squaredNorm();
        const double scaled = sum / n * dprime / delta2;
        CHECK(scaled > 0.97 * dprime);
        CHECK(scaled < 1.03 * dprime);
    }
}

TEST_CASE("projected gaussian dot products obey chi-square(1) tail bounds") {
    // For unit vhat orthogonal to h, z = <vhat, p> sqrt(d')/Delta is standard
    // normal; the four tail events each hold with frequency >= 1 - delta - 0.02
    // at delta = 0.1 over 1e4 draws.
    RandomSource rng(23, 8);
    const int d = 12;
    const double delta = 0.1;
    const double ln1d = std::log(1.0 / delta);
    const Vec h = random_unit_vector(d, rng);
    Vec vhat = random_unit_vector(d, rng);
    vhat = project_orth(vhat, h);
    vhat /= vhat.norm();
    const double delta_pert = 0.3;
    const double dprime = d - 1;
    const int n = 10000;
    int ok_up = 0, ok_lo = 0, ok_norm_up = 0, ok_norm_lo = 0;
    // quantile constants: Phi^-1(0.95) and Phi^-1(0.55)
    const double q_up = 1.6448536269514722, q_lo = 0.12566134685507402;
    const double up_bound = 2.0 * std::min(q_up * q_up, 0.5 + ln1d + std::sqrt(ln1d));
    const double lo_bound = std::max(q_lo * q_lo, 1.0 - 2.0 * std::sqrt(ln1d));
    for (int i = 0; i < n; ++i) {
        const Vec p = sample_projected_gaussian(h, delta_pert * delta_pert, rng);
        const double z2 = vhat.dot(p) * vhat.dot(p) * dprime / (delta_pert * delta_pert);
        ok_up += z2 <= up_bound;
        ok_lo += z2 >= lo_bound;
        const double g2 = p.squaredNorm() * dprime / (delta_pert * delta_pert) / dprime;
        ok_norm_up += g2 <= 1.0 + 2.0 * std::sqrt(ln1d / dprime) + 2.0 * ln1d / dprime;
        ok_norm_lo += g2 >= 1.0 - 2.0 * std::sqrt(ln1d / dprime);
    }
    const double thresh = (1.0 - delta - 0.02) * n;
    CHECK(ok_up >= thresh);
    CHECK(ok_lo >= thresh);
    CHECK(ok_norm_up >= thresh);
    CHECK(ok_norm_lo >= thresh);
}

TEST_CASE("determinism: same RandomSource state gives identical samples") {
    RandomSource a(2, 2), b(2, 2);
    const Vec h = random_unit_vector(5, a);
    const Vec h2 = random_unit_vector(5, b);
    CHECK((h - h2).norm() == 0.0);
    const Vec g1 = sample_projected_gaussian(h, 0.3, a);
    const Vec g2 = sample_projected_gaussian(h2, 0.3, b);
    CHECK((g1 - g2).norm() == 0.0);
}

TEST_CASE("ActionVec enforces ball membership") {
    CHECK_THROWS_AS(ActionVec(make_vec({1.0, 0.1})), std::domain_error);
    CHECK_NOTHROW(ActionVec(make_vec({1.0, 0.0})));
}
