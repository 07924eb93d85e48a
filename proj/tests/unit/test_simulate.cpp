#include "doctest.h"
#include "fscpomdp/policy_iteration.hpp"
#include "fscpomdp/pomdp_file.hpp"
#include "fscpomdp/simulate.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace fscpomdp;

TEST_CASE("deterministic toy returns the geometric sum") {
    const auto f = parse_pomdp_file("discount: 0.9\nstates: 1\nactions: 1\nobservations: 1\nT: * identity\n"
                                    "O: * identity\nR: * : * : * : * 1.0\n");
    const int h = truncation_horizon(f.model);
    CHECK(std::pow(0.9, h) * 1.0 / 0.1 < 1e-3);
    CHECK(std::pow(0.9, h - 1) * 1.0 / 0.1 >= 1e-3);
    const auto r = simulate(f.model, initial_controller(f.model), 0, Belief::uniform(1), 100, h, 1);
    CHECK(std::abs(r.mean - 10.0) < 1e-3);
    CHECK(r.std_error == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("zero reward") {
    const auto f = parse_pomdp_file("discount: 0.9\nstates: 3\nactions: 2\nobservations: 2\nT: * uniform\nO: * uniform\n");
    const auto r = simulate(f.model, initial_controller(f.model), 0, Belief::uniform(3), 1000, 50, 3);
    CHECK(r.mean == 0.0);
    CHECK(r.std_error == 0.0);
}

TEST_CASE("results are independent of the worker count") {
    std::mt19937_64 rng(2);
    const auto m = oracle::random_model(rng, 3, 2, 2, 0.9);
    const auto fsc = oracle::random_controller(rng, 3, 2, 2);
    const auto a = simulate(m, fsc, 0, Belief::uniform(3), 5000, 40, 99, 1);
    const auto b = simulate(m, fsc, 0, Belief::uniform(3), 5000, 40, 99, 7);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    const auto c = simulate(m, fsc, 0, Belief::uniform(3), 5000, 40, 100, 1);
    CHECK(a.mean != c.mean);
    CHECK(episode_seed(1, 0) != episode_seed(1, 1));
}

TEST_CASE("random solved controller agrees with its evaluation") {
    std::mt19937_64 rng(6);
    const auto m = oracle::random_model(rng, 3, 2, 2, 0.9);
    const auto pi = policy_iterate(m, initial_controller(m), {});
    const Belief b0 = oracle::random_belief(rng, 3);
    const auto q0 = start_node(pi.controller, pi.values, b0);
    const auto r = simulate(m, pi.controller, q0, b0, 100000, truncation_horizon(m), 5);
    CHECK(std::abs(r.mean - evaluate_at(pi.values, b0).value) <= 4.0 * r.std_error);
}
