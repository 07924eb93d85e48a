#include "doctest.h"
#include "fscpomdp/model.hpp"
#include "oracles.hpp"

#include <string>

using namespace fscpomdp;

namespace {

RawModel trivial_raw() {
    RawModel raw;
    raw.transition = {{{1.0}}};
    raw.observation = {{{1.0}}};
    raw.reward = {{1.0}};
    raw.discount = 0.9;
    return raw;
}

std::string error_of(const RawModel& raw) {
    try {
        validate_model(raw);
    } catch (const ModelError& e) {
        return e.what();
    }
    return "";
}

Belief make_belief(std::initializer_list<double> p) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(p.size()));
    Eigen::Index i = 0;
    for (double x : p) v[i++] = x;
    return Belief(v);
}

}  // namespace

TEST_CASE("trivial chain validates") {
    const auto m = validate_model(trivial_raw());
    CHECK(m.num_states() == 1);
    CHECK(m.num_actions() == 1);
    CHECK(m.num_observations() == 1);
    CHECK(m.discount() == 0.9);
    CHECK(m.state_names() == std::vector<std::string>{"0"});
}

TEST_CASE("stochasticity is enforced with a renormalization band") {
    RawModel raw;
    raw.transition = {{{0.5, 0.3}, {0.0, 1.0}}};
    raw.observation = {{{1.0}, {1.0}}};
    raw.reward = {{0.0}, {0.0}};
    raw.discount = 0.9;
    CHECK(error_of(raw).find("stochasticity violation") != std::string::npos);

    raw.transition = {{{0.5, 0.5 + 5e-7}, {0.0, 1.0}}};
    const auto m = validate_model(raw);
    CHECK(m.transition(0, 0, 0) + m.transition(0, 0, 1) == doctest::Approx(1.0).epsilon(1e-15));

    raw.transition = {{{-0.2, 1.2}, {0.0, 1.0}}};
    CHECK(error_of(raw).find("negative probability") != std::string::npos);
}

TEST_CASE("dimension and discount errors") {
    auto raw = trivial_raw();
    raw.reward = {{1.0, 2.0}};
    CHECK(error_of(raw).find("dimension mismatch") != std::string::npos);
    raw = trivial_raw();
    raw.discount = 1.0;
    CHECK(error_of(raw).find("discount") != std::string::npos);
    raw.discount = 0.0;
    CHECK(error_of(raw).find("discount") != std::string::npos);
}

TEST_CASE("belief construction") {
    CHECK_THROWS_AS(make_belief({0.5, 0.4}), ModelError);
    CHECK_THROWS_AS(make_belief({1.5, -0.5}), ModelError);
    const Belief b = make_belief({1.0 + 1e-12, -1e-13});
    CHECK(b[1] == 0.0);
    CHECK(b.probs().sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Belief::uniform(4)[2] == 0.25);
    CHECK(Belief::unit(3, 1)[1] == 1.0);
}

TEST_CASE("observation probability") {
    std::mt19937_64 rng(7);
    auto raw = oracle::random_raw_model(rng, 3, 2, 4, 0.9);
    for (auto& per_action : raw.observation)
        for (auto& row : per_action) row.assign(4, 0.25);
    const auto flat = validate_model(raw);
    const auto pz = observation_probability(flat, oracle::random_belief(rng, 3), 1);
    for (Eigen::Index z = 0; z < 4; ++z) CHECK(pz[z] == doctest::Approx(0.25).epsilon(1e-14));

    RawModel det;
    det.transition = {{{0.0, 1.0}, {0.0, 1.0}}};
    det.observation = {{{1.0, 0.0}, {0.0, 1.0}}};
    det.reward = {{0.0}, {0.0}};
    det.discount = 0.9;
    const auto dm = validate_model(det);
    const auto pd = observation_probability(dm, make_belief({0.3, 0.7}), 0);
    CHECK(pd[1] == 1.0);
    CHECK(pd[0] == 0.0);

    const auto m = oracle::random_model(rng, 3, 2, 2, 0.9);
    const Belief u = Belief::uniform(3);
    for (ActionId a = 0; a < 2; ++a) {
        const auto p = observation_probability(m, u, a);
        for (ObsId z = 0; z < 2; ++z) {
            long double sum = 0.0L;
            for (StateId s = 0; s < 3; ++s)
                for (StateId s2 = 0; s2 < 3; ++s2)
                    sum += static_cast<long double>(u[s]) * m.transition(s, a, s2) * m.observation(s2, a, z);
            CHECK(p[static_cast<Eigen::Index>(z)] == doctest::Approx(static_cast<double>(sum)).epsilon(1e-14));
        }
    }
}

TEST_CASE("belief update") {
    RawModel det;
    det.transition = {{{0.0, 1.0}, {0.0, 1.0}}};
    det.observation = {{{1.0, 0.0}, {0.0, 1.0}}};
    det.reward = {{0.0}, {0.0}};
    det.discount = 0.9;
    const auto dm = validate_model(det);
    const Belief b1 = belief_update(dm, make_belief({1.0, 0.0}), 0, 1);
    CHECK(b1[0] == 0.0);
    CHECK(b1[1] == 1.0);
    CHECK_THROWS_AS(belief_update(dm, make_belief({1.0, 0.0}), 0, 0), ImpossibleObservation);

    std::mt19937_64 rng(11);
    auto raw = oracle::random_raw_model(rng, 3, 2, 3, 0.9);
    for (auto& per_action : raw.observation)
        for (auto& row : per_action) row.assign(3, 1.0 / 3.0);
    const auto flat = validate_model(raw);
    const Belief b = make_belief({0.2, 0.3, 0.5});
    const Belief pred = belief_update(flat, b, 0, 2);
    const auto num = belief_numerator(flat, b, 0, 2);
    CHECK(num.sum() == doctest::Approx(observation_probability(flat, b, 0)[2]).epsilon(1e-14));
    for (StateId s2 = 0; s2 < 3; ++s2) {
        double t = 0.0;
        for (StateId s = 0; s < 3; ++s) t += b[s] * flat.transition(s, 0, s2);
        CHECK(pred[s2] == doctest::Approx(t).epsilon(1e-13));
    }

    const auto m = oracle::random_model(rng, 3, 2, 2, 0.9);
    for (ActionId a = 0; a < 2; ++a)
        for (ObsId z = 0; z < 2; ++z) {
            std::vector<double> w(3, 0.0);
            double total = 0.0;
            for (StateId s2 = 0; s2 < 3; ++s2) {
                for (StateId s = 0; s < 3; ++s) w[s2] += b[s] * m.transition(s, a, s2);
                w[s2] *= m.observation(s2, a, z);
                total += w[s2];
            }
            if (total == 0.0) continue;
            const Belief up = belief_update(m, b, a, z);
            for (StateId s2 = 0; s2 < 3; ++s2) CHECK(up[s2] == doctest::Approx(w[s2] / total).epsilon(1e-13));
        }
}

TEST_CASE("expected reward") {
    std::mt19937_64 rng(3);
    const auto m = oracle::random_model(rng, 4, 3, 2, 0.9);
    CHECK(expected_reward(m, Belief::unit(4, 2), 1) == m.reward(2, 1));
    const Belief b = oracle::random_belief(rng, 4);
    for (ActionId a = 0; a < 3; ++a) {
        double r = 0.0;
        for (StateId s = 0; s < 4; ++s) r += b[s] * m.reward(s, a);
        CHECK(expected_reward(m, b, a) == doctest::Approx(r).epsilon(1e-14));
    }

    auto raw = oracle::random_raw_model(rng, 3, 2, 2, 0.9);
    for (auto& row : raw.reward) row.assign(2, -2.5);
    const auto c = validate_model(raw);
    CHECK(expected_reward(c, oracle::random_belief(rng, 3), 0) == doctest::Approx(-2.5));
}

TEST_CASE("projection matrices") {
    std::mt19937_64 rng(5);
    const auto m = oracle::random_model(rng, 3, 2, 2, 0.9);
    for (ActionId a = 0; a < 2; ++a)
        for (ObsId z = 0; z < 2; ++z)
            for (StateId s = 0; s < 3; ++s)
                for (StateId s2 = 0; s2 < 3; ++s2)
                    CHECK(m.projection(a, z)(s, s2) ==
                          doctest::Approx(m.transition(s, a, s2) * m.observation(s2, a, z)));
}
