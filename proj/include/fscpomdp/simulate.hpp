#pragma once

#include "fscpomdp/controller.hpp"
#include "fscpomdp/model.hpp"

#include <cstdint>

namespace fscpomdp {

struct SimulationResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t episodes = 0;
    int horizon = 0;
};

/// Smallest H >= 1 with beta^H * Rmax / (1 - beta) < 1e-3 * max(1, Rmax).
int truncation_horizon(const PomdpModel& model);

/// Seed of episode `index`, a splitmix64 mix of the run seed and the index.
std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index);

/// Samples s0 ~ b0, starts the controller at `start`, and accumulates
/// sum_t beta^t r(s_t, a_t) for `horizon` steps per episode. Episodes are
/// split across `threads` workers; each has its own generator, so the result
/// does not depend on the worker count.
SimulationResult simulate(const PomdpModel& model, const FiniteStateController& fsc, NodeId start, const Belief& b0,
                          std::size_t episodes, int horizon, std::uint64_t seed, unsigned threads = 0);

}  // namespace fscpomdp
