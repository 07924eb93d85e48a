#pragma once

#include "fscpomdp/controller.hpp"
#include "fscpomdp/model.hpp"
#include "fscpomdp/policy_iteration.hpp"
#include "fscpomdp/value_function.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace fscpomdp {

/// Upper bound on the optimal value of a belief.
class BeliefBound {
public:
    virtual ~BeliefBound() = default;
    virtual double upper(const Belief& b) const = 0;
};

/// Linear bound from the fully observable MDP: UB(b) = sum_s b(s) V_MDP(s).
class MdpBound final : public BeliefBound {
public:
    explicit MdpBound(Eigen::VectorXd state_values) : state_values_(std::move(state_values)) {}
    double upper(const Belief& b) const override { return b.probs().dot(state_values_); }
    const Eigen::VectorXd& state_values() const { return state_values_; }

private:
    Eigen::VectorXd state_values_;
};

/// Value iteration on the underlying MDP, started from Rmax/(1-beta) so that
/// every iterate stays an upper bound, run to a Bellman residual of 1e-10.
MdpBound mdp_upper_bound(const PomdpModel& model);

class SearchExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OrNode {
    Belief belief;
    double lower = 0.0;
    double upper = 0.0;
    double initial_lower = 0.0;  // controller value when the node was created
    int depth = 0;
    double reach_prob = 1.0;
    std::optional<ActionId> best_action;   // by upper bound
    std::optional<ActionId> lower_action;  // by lower bound
    std::vector<std::size_t> children;     // AndNode per action; empty on the fringe
    bool improved = false;
    /// Per observation: child OrNode under lower_action, or kNoSuccessor.
    std::vector<std::size_t> chosen_successors;
    std::size_t parent = kNoSuccessor;  // AndNode index

    // Best fringe node of this node's upper-bound solution subtree, scored
    // relative to this node: gap * (reach_prob ratio) * beta^(depth delta).
    double best_score = 0.0;
    int best_depth = 0;
    std::size_t best_fringe = 0;

    bool fringe() const { return children.empty(); }
};

struct AndNode {
    ActionId action = 0;
    std::size_t parent = 0;           // OrNode index
    std::vector<double> probs;        // Pr(z|b,a)
    std::vector<std::size_t> children;  // OrNode per observation; kNoSuccessor when probs[z] == 0
    double lower = 0.0;
    double upper = 0.0;
    double best_score = 0.0;
    int best_depth = 0;
    std::size_t best_fringe = 0;
};

/// AND/OR tree over beliefs rooted at the start belief. Lower bounds come
/// from a fixed vector set (the current controller's values), upper bounds
/// from a BeliefBound. Nodes are never merged, even for equal beliefs.
class SearchTree {
public:
    SearchTree(const PomdpModel& model, const BeliefBound& bound, const VectorSet& lower_values, Belief root_belief,
               double improvement_tol = 1e-9);

    std::size_t root() const { return 0; }
    const OrNode& node(std::size_t i) const { return or_nodes_.at(i); }
    const AndNode& and_node(std::size_t i) const { return and_nodes_.at(i); }
    std::size_t or_count() const { return or_nodes_.size(); }
    std::size_t and_count() const { return and_nodes_.size(); }
    std::size_t expansions() const { return expansions_; }

    const PomdpModel& model() const { return *model_; }
    const VectorSet& lower_values() const { return *values_; }

    /// Creates one AndNode per action and one OrNode per observation with
    /// positive probability, then refreshes this node's own bounds. Throws
    /// std::logic_error if the node already has children.
    void expand_node(std::size_t i);

    /// Recomputes bounds, improvement flags and best-fringe bookkeeping on
    /// the path from `from` to the root.
    void backup_bounds(std::size_t from);

    /// Fringe node of the upper-bound solution subtree that maximizes
    /// (upper - lower) * reach_prob * beta^depth; ties go to the shallower,
    /// then the older node. Recomputes reach_prob along the chosen path.
    /// Throws SearchExhausted when every candidate scores zero.
    std::size_t select_fringe_node();

    /// rho(b,a) + beta * sum_z Pr(z|b,a) * child bound, for both bounds.
    void refresh_and(std::size_t i);
    /// Max over the AND children of an expanded OR node.
    void refresh_or(std::size_t i);

private:
    std::size_t add_or(Belief b, int depth, double reach, std::size_t parent);

    const PomdpModel* model_;
    const BeliefBound* bound_;
    const VectorSet* values_;
    double improvement_tol_;
    std::vector<OrNode> or_nodes_;
    std::vector<AndNode> and_nodes_;
    std::size_t expansions_ = 0;
};

struct ExtractionResult {
    FiniteStateController controller;
    VectorSet values;  // evaluation of controller
    bool changed = false;
    bool added = false;
    NodeId start = 0;
};

/// Turns the improved, lower-bound-greedy part of the tree into controller
/// edits (leaves first), then prunes nodes unreachable from the start node.
/// Requires the root to be improved.
ExtractionResult extract_improvements(const SearchTree& tree, const FiniteStateController& fsc, const VectorSet& V,
                                      const Tolerances& tol = {}, const std::string& tag = "search");

struct SearchRecord {
    int iteration = 0;
    std::size_t controller_nodes = 0;
    double lower = 0.0;  // controller value at the start belief
    double upper = 0.0;  // best upper bound found so far
    std::size_t tree_nodes = 0;
    std::size_t expansions = 0;
    double elapsed_seconds = 0.0;
};

struct HeuristicSearchResult {
    FiniteStateController controller;
    VectorSet values;
    double lower = 0.0;
    double upper = 0.0;
    SolveStatus status = SolveStatus::IterationLimit;
    std::vector<SearchRecord> trace;
};

/// Outer loop: evaluate the controller, search until the root lower bound
/// improves or the gap closes to epsilon, extract improvements, repeat.
/// `memory_limit` caps the OR nodes of a single search tree.
HeuristicSearchResult heuristic_search_solve(const PomdpModel& model, const Belief& b0,
                                             const FiniteStateController& fsc0, const SolverConfig& cfg,
                                             std::size_t memory_limit, const BeliefBound* bound = nullptr);

}  // namespace fscpomdp
