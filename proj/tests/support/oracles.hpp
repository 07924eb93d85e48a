#pragma once
// Reference implementations used only by tests. They work from the raw
// model tables with plain loops and share no algorithmic code with the
// library.

#include "fscpomdp/controller.hpp"
#include "fscpomdp/model.hpp"
#include "fscpomdp/value_function.hpp"

#include <random>
#include <string>
#include <vector>

namespace oracle {

using fscpomdp::Belief;
using fscpomdp::FiniteStateController;
using fscpomdp::PomdpModel;
using fscpomdp::VectorSet;
using Vec = std::vector<double>;

fscpomdp::RawModel random_raw_model(std::mt19937_64& rng, std::size_t S, std::size_t A, std::size_t Z,
                                    double discount);
PomdpModel random_model(std::mt19937_64& rng, std::size_t S, std::size_t A, std::size_t Z, double discount);
/// Observation equals the successor state.
PomdpModel random_observable_model(std::mt19937_64& rng, std::size_t S, std::size_t A, double discount);

Belief random_belief(std::mt19937_64& rng, std::size_t n);
VectorSet random_vector_set(std::mt19937_64& rng, std::size_t n, std::size_t count, double scale = 10.0);
FiniteStateController random_controller(std::mt19937_64& rng, std::size_t nodes, std::size_t A, std::size_t Z);

/// max_i b . v_i by enumeration.
double max_dot(const VectorSet& V, const Vec& b);

/// One-step backup at b, maximizing over every action and every mapping
/// from observations to vectors of V (|V|^|Z| strategies per action).
double strategy_backup(const PomdpModel& m, const VectorSet& V, const Vec& b);

/// Same backup written per observation: rho(b,a) + beta sum_z max_i sum_{s'} Pr(z,s'|b,a) v_i(s').
double per_observation_backup(const PomdpModel& m, const VectorSet& V, const Vec& b);

/// Controller values by fixed-point iteration until successive iterates
/// differ by less than tol in every entry.
std::vector<Vec> picard_evaluate(const PomdpModel& m, const FiniteStateController& fsc, double tol = 1e-13);

/// Optimal values of the underlying fully observable MDP.
Vec mdp_values(const PomdpModel& m, double tol = 1e-13);

/// All beliefs with entries k/res.
std::vector<Vec> simplex_grid(std::size_t n, std::size_t res);

/// sup_b |max_V b.v - max_U b.u| by enumerating vertices of the arrangement
/// of pairwise-indifference hyperplanes and simplex facets.
double vertex_residual(const VectorSet& V, const VectorSet& U);

/// Reachable node set from the roots by breadth-first search.
std::vector<bool> reachable(const FiniteStateController& fsc, const std::vector<std::size_t>& roots);

/// Directory with the bundled .pomdp files.
std::string problems_dir();
std::vector<std::string> bundled_problems();

}  // namespace oracle
