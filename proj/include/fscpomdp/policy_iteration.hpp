#pragma once

#include "fscpomdp/controller.hpp"
#include "fscpomdp/model.hpp"
#include "fscpomdp/value_function.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace fscpomdp {

enum class SolveStatus { EpsilonOptimal, IterationLimit, NodeLimit, MemoryLimit };

std::string_view to_string(SolveStatus status);

struct SolverConfig {
    double epsilon = 0.1;
    int max_iterations = 500;
    std::size_t max_nodes = 5000;
    Tolerances tolerances;

    /// Throws std::invalid_argument on a non-positive epsilon or limit.
    void validate() const;
};

/// One row per outer iteration.
struct IterationRecord {
    int iteration = 0;
    std::size_t controller_nodes = 0;
    std::size_t dp_vectors = 0;
    double residual = 0.0;
    double probe_value = 0.0;  // mean value over the probe beliefs
    std::vector<double> probe_values;
    double elapsed_seconds = 0.0;
};

struct IterationStats {
    std::vector<IterationRecord> records;
};

/// Deterministic low-discrepancy beliefs on the simplex. The sequence offset
/// is derived from `key` (usually the problem name), so the set is stable
/// across runs.
std::vector<Belief> probe_beliefs(std::size_t num_states, std::size_t count, std::string_view key);

/// Single node taking the maximin-reward action, looping on every observation.
FiniteStateController initial_controller(const PomdpModel& model);

struct PolicyIterationResult {
    FiniteStateController controller;
    VectorSet values;
    IterationStats stats;
    SolveStatus status;
};

/// Threshold on the Bellman residual that certifies epsilon-optimality.
double residual_threshold(double epsilon, double discount);

/// Evaluate, DP-update, test the residual, transform the controller, repeat.
PolicyIterationResult policy_iterate(const PomdpModel& model, const FiniteStateController& fsc0,
                                     const SolverConfig& cfg, std::string_view probe_key = "");

}  // namespace fscpomdp
