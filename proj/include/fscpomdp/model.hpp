#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fscpomdp {

using StateId = std::size_t;
using ActionId = std::size_t;
using ObsId = std::size_t;

/// Thrown when model data violates a structural or stochastic invariant.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by belief_update when Pr(z|b,a) is zero.
class ImpossibleObservation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Unchecked model tables as they come out of a parser or a test generator.
///
/// Layout:
///   transition[a][s][s']  = Pr(s'|s,a)
///   observation[a][s'][z] = Pr(z|s',a)
///   reward[s][a]          = r(s,a)
struct RawModel {
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    std::vector<std::string> observation_names;
    std::vector<std::vector<std::vector<double>>> transition;
    std::vector<std::vector<std::vector<double>>> observation;
    std::vector<std::vector<double>> reward;
    double discount = 0.0;
};

/// A validated discrete POMDP. Immutable after construction; obtain one from
/// validate_model().
class PomdpModel {
public:
    std::size_t num_states() const { return reward_.rows(); }
    std::size_t num_actions() const { return reward_.cols(); }
    std::size_t num_observations() const { return num_obs_; }
    double discount() const { return discount_; }

    double transition(StateId s, ActionId a, StateId next) const { return transition_[a](s, next); }
    double observation(StateId next, ActionId a, ObsId z) const { return observation_[a](next, z); }
    double reward(StateId s, ActionId a) const { return reward_(s, a); }

    /// Rows are current states, columns successor states.
    const Eigen::MatrixXd& transition_matrix(ActionId a) const { return transition_[a]; }
    /// Rows are successor states, columns observations.
    const Eigen::MatrixXd& observation_matrix(ActionId a) const { return observation_[a]; }
    /// S x A.
    const Eigen::MatrixXd& reward_matrix() const { return reward_; }
    Eigen::VectorXd reward_vector(ActionId a) const { return reward_.col(a); }

    /// M(s,s') = Pr(s'|s,a) Pr(z|s',a). Precomputed at validation.
    const Eigen::MatrixXd& projection(ActionId a, ObsId z) const { return projection_[a * num_obs_ + z]; }

    const std::vector<std::string>& state_names() const { return state_names_; }
    const std::vector<std::string>& action_names() const { return action_names_; }
    const std::vector<std::string>& observation_names() const { return observation_names_; }

    /// Largest |r(s,a)|.
    double max_abs_reward() const { return reward_.cwiseAbs().maxCoeff(); }

private:
    friend PomdpModel validate_model(const RawModel& raw);
    PomdpModel() = default;

    std::size_t num_obs_ = 0;
    double discount_ = 0.0;
    std::vector<Eigen::MatrixXd> transition_;
    std::vector<Eigen::MatrixXd> observation_;
    std::vector<Eigen::MatrixXd> projection_;
    Eigen::MatrixXd reward_;
    std::vector<std::string> state_names_;
    std::vector<std::string> action_names_;
    std::vector<std::string> observation_names_;
};

/// Row sums may deviate from 1 by at most this much; such rows are renormalized.
inline constexpr double kRenormalizationBand = 1e-6;

/// Checks dimensions, stochasticity and the discount, and builds a model.
/// Missing names are filled with decimal indices.
PomdpModel validate_model(const RawModel& raw);

/// A probability distribution over states.
class Belief {
public:
    /// Entries must be >= 0 (values above -1e-12 are clamped) and sum to 1
    /// within 1e-9; the stored vector is renormalized exactly.
    explicit Belief(Eigen::VectorXd probs);

    static Belief uniform(std::size_t num_states);
    static Belief unit(std::size_t num_states, StateId s);

    const Eigen::VectorXd& probs() const { return probs_; }
    double operator[](StateId s) const { return probs_[s]; }
    std::size_t size() const { return probs_.size(); }

private:
    Eigen::VectorXd probs_;
};

/// Pr(z|b,a) for every z.
Eigen::VectorXd observation_probability(const PomdpModel& model, const Belief& b, ActionId a);

/// Bayesian successor belief b_z^a. Throws ImpossibleObservation when Pr(z|b,a) = 0.
Belief belief_update(const PomdpModel& model, const Belief& b, ActionId a, ObsId z);

/// The unnormalized successor, Pr(z|s',a) sum_s Pr(s'|s,a) b(s).
Eigen::VectorXd belief_numerator(const PomdpModel& model, const Belief& b, ActionId a, ObsId z);

/// rho(b,a) = sum_s b(s) r(s,a).
double expected_reward(const PomdpModel& model, const Belief& b, ActionId a);

}  // namespace fscpomdp
