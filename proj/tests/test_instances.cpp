#include <doctest.h>

#include <cmath>

#include "ballbandit/instances.hpp"

using namespace ballbandit;

TEST_CASE("pareto family shape and norms") {
    RandomSource rng(2, 1);
    const int d = 6;
    const Vec h = random_unit_vector(d, rng);
    {
        auto fam = gen_pareto_family(h, 0.5, 0.0, d, 1.0, rng);
        REQUIRE(fam.size() == static_cast<std::size_t>(2 * (d - 1) + 1));
        for (const auto& m : fam) CHECK((m.theta_star - fam[0].theta_star).norm() < 1e-14);
    }
    {
        const double delta = 0.3;
        auto fam = gen_pareto_family(h, 0.5, delta, d, 1.0, rng);
        for (std::size_t i = 1; i < fam.size(); ++i) {
            const double n = fam[i].theta_star.norm();
            CHECK(n == doctest::Approx(std::sqrt(0.25 + delta * delta)).epsilon(1e-12));
            CHECK(n <= std::sqrt(0.5) + 1e-12);
            // optimal action is theta / sqrt(rho^2 + Delta^2)
            const Vec astar = fam[i].optimal_action();
            CHECK((astar - fam[i].theta_star / n).norm() < 1e-14);
        }
        // members deviate from the center along directions orthogonal to h
        for (std::size_t i = 1; i < fam.size(); ++i) {
            const Vec dev = fam[i].theta_star - fam[0].theta_star;
            CHECK(std::abs(dev.dot(h)) < 1e-10);
            CHECK(dev.norm() == doctest::Approx(delta).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(gen_pareto_family(h, 0.9, 0.9, d, 1.0, rng), std::domain_error);
}

TEST_CASE("cube family coordinates") {
    {
        auto inst = gen_cube_family(0.5, 0.1, 4, {1, 1, 1, 1}, 1.0);
        REQUIRE(inst.theta_star.size() == 5);
        CHECK(inst.theta_star[0] == 0.5);
        for (int i = 1; i <= 4; ++i) CHECK(inst.theta_star[i] == doctest::Approx(0.05));
    }
    {
        RandomSource rng(4, 4);
        for (int it = 0; it < 50; ++it) {
            std::vector<int> signs;
            for (int i = 0; i < 6; ++i) signs.push_back(rng.uniform_index(2) ? 1 : -1);
            const double delta = 0.5 * rng.uniform01();
            auto inst = gen_cube_family(0.5, delta, 6, signs, 1.0);
            CHECK(inst.theta_star.norm() ==
                  doctest::Approx(std::sqrt(0.25 + delta * delta)).epsilon(1e-12));
            CHECK(inst.theta_star.norm() >= 0.25);
            CHECK(inst.theta_star.norm() <= 1.0 + 1e-12);
        }
    }
    CHECK_THROWS_AS(gen_cube_family(0.5, 0.1, 4, {1, 1, 1}, 1.0), std::domain_error);
    CHECK_THROWS_AS(gen_cube_family(0.9, 0.9, 2, {1, 1}, 1.0), std::domain_error);
}

TEST_CASE("near-hint instances satisfy the closeness bounds") {
    RandomSource rng(6, 2);
    const int d = 8;  // output dimension d+1
    const Vec h = random_unit_vector(d + 1, rng);
    {
        auto inst = gen_near_hint(h, 0.0, d, 1.0, rng);
        CHECK((inst.theta_star - 0.5 * h).norm() == 0.0);
        CHECK((inst.optimal_action() - h).norm() < 1e-12);
        CHECK(instantaneous_regret(inst, h) < 1e-12);
    }
    for (const double delta : {0.05, 0.25}) {
        for (int it = 0; it < 2000; ++it) {
            auto inst = gen_near_hint(h, delta, d, 1.0, rng);
            REQUIRE(inst.theta_star.size() == d + 1);
            CHECK((inst.theta_star - 0.5 * h).norm() <= delta + 1e-12);
            CHECK((inst.optimal_action() - h).norm() <= 4.0 * delta + 1e-12);
            CHECK(instantaneous_regret(inst, h) <= 972.0 * delta * delta + 1e-12);
        }
    }
    CHECK_THROWS_AS(gen_near_hint(h, 0.3, d, 1.0, rng), std::domain_error);
}

TEST_CASE("hint of a prescribed quality") {
    RandomSource rng(8, 1);
    BanditInstance inst;
    inst.theta_star = random_unit_vector(5, rng);  // ||theta*|| = 1
    inst.noise_sigma = 1.0;
    {
        const Vec h = gen_hint_of_quality(inst, 0.0, rng);
        CHECK((h - inst.optimal_action()).norm() < 1e-9);
    }
    {
        const Vec h = gen_hint_of_quality(inst, 2.0, rng);
        // the regret target is met to 1e-6||theta*||; the angle gap near the
        // antipode scales like its square root
        CHECK((h + inst.optimal_action()).norm() < 2e-3);
        CHECK(std::abs(instantaneous_regret(inst, h) - 2.0) <= 1e-6);
    }
    {
        // target 0.1 at unit norm: 1 - cos(angle) = 0.1
        const Vec h = gen_hint_of_quality(inst, 0.1, rng);
        CHECK(h.dot(inst.optimal_action()) == doctest::Approx(0.9).epsilon(1e-6));
    }
    CHECK_THROWS_AS(gen_hint_of_quality(inst, 2.5, rng), std::domain_error);
    CHECK_THROWS_AS(gen_hint_of_quality(inst, -0.1, rng), std::domain_error);
}

TEST_CASE("hint-of-quality round trip on random instances") {
    RandomSource rng(9, 9);
    for (int it = 0; it < 100; ++it) {
        const int d = 2 + static_cast<int>(rng.uniform_index(8));
        BanditInstance inst;
        inst.theta_star = (0.3 + 3.0 * rng.uniform01()) * random_unit_vector(d, rng);
        inst.noise_sigma = 1.0;
        const double target = 2.0 * inst.theta_norm() * rng.uniform01();
        const Vec h = gen_hint_of_quality(inst, target, rng);
        CHECK(std::abs(h.norm() - 1.0) < 1e-12);
        CHECK(std::abs(instantaneous_regret(inst, h) - target) <= 1e-6 * inst.theta_norm());
    }
}

TEST_CASE("generators are deterministic under fixed seeds") {
    RandomSource a(10, 3), b(10, 3);
    const Vec h1 = random_unit_vector(5, a), h2 = random_unit_vector(5, b);
    auto f1 = gen_pareto_family(h1, 0.4, 0.2, 5, 1.0, a);
    auto f2 = gen_pareto_family(h2, 0.4, 0.2, 5, 1.0, b);
    REQUIRE(f1.size() == f2.size());
    for (std::size_t i = 0; i < f1.size(); ++i)
        CHECK((f1[i].theta_star - f2[i].theta_star).norm() == 0.0);
    auto n1 = gen_near_hint(h1, 0.1, 4, 1.0, a);
    auto n2 = gen_near_hint(h2, 0.1, 4, 1.0, b);
    CHECK((n1.theta_star - n2.theta_star).norm() == 0.0);
}
