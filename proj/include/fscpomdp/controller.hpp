#pragma once

#include "fscpomdp/model.hpp"
#include "fscpomdp/value_function.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace fscpomdp {

using NodeId = std::size_t;

struct ControllerNode {
    ActionId action = 0;
    std::vector<NodeId> successors;  // one per observation
    std::string tag;                 // origin label only
};

/// Deterministic finite-state controller: each machine state fixes an action
/// and, per observation, the next machine state.
class FiniteStateController {
public:
    FiniteStateController(std::size_t num_observations, std::vector<ControllerNode> nodes);

    /// One node taking `action` and looping to itself on every observation.
    static FiniteStateController single_node(std::size_t num_observations, ActionId action,
                                             std::string tag = "initial");

    std::size_t size() const { return nodes_.size(); }
    std::size_t num_observations() const { return num_obs_; }
    const ControllerNode& node(NodeId i) const { return nodes_.at(i); }
    const std::vector<ControllerNode>& nodes() const { return nodes_; }

    /// Same actions and links; tags are ignored.
    bool structurally_equal(const FiniteStateController& other) const;

private:
    std::size_t num_obs_;
    std::vector<ControllerNode> nodes_;
};

/// Solves v_i(s) = r(s,a_i) + beta sum_{s',z} Pr(s'|s,a_i) Pr(z|s',a_i) v_{l(i,z)}(s')
/// for every machine state. Output vector i is annotated with node i's action
/// and successors.
VectorSet evaluate_controller(const PomdpModel& model, const FiniteStateController& fsc);

/// Largest |lhs - rhs| of the evaluation equations for the given vectors.
double evaluation_residual(const PomdpModel& model, const FiniteStateController& fsc, const VectorSet& V);

/// Accumulates keep / change / add decisions against a controller whose
/// values are known, then produces the transformed controller.
///
/// Node indices of the source controller stay valid while editing. A node
/// merged into another is redirected, and resolve() follows the redirect.
class ControllerEditor {
public:
    enum class Outcome { Kept, Changed, Added };

    struct Decision {
        Outcome outcome;
        NodeId node;
    };

    ControllerEditor(const FiniteStateController& fsc, const VectorSet& values, Tolerances tol = {});

    /// Applies one candidate machine state: a structural duplicate is kept;
    /// otherwise a candidate whose values pointwise dominate existing nodes
    /// rewrites the lowest such node and merges the rest into it; otherwise it
    /// is appended. Successor indices refer to the editor's node indices.
    Decision integrate(ActionId action, std::vector<NodeId> successors, const Eigen::VectorXd& values,
                       const std::string& tag);

    /// Current best-known values for a node.
    const Eigen::VectorXd& values(NodeId node) const { return values_[resolve(node)]; }
    NodeId resolve(NodeId node) const;
    std::size_t node_count() const { return nodes_.size(); }

    bool changed() const { return changed_; }
    bool added() const { return added_; }

    struct Finished {
        FiniteStateController controller;
        /// Old editor index -> index in the compacted controller.
        std::vector<NodeId> index_map;
    };
    /// Drops merged nodes and compacts indices.
    Finished finish() const;

private:
    std::size_t num_obs_;
    Tolerances tol_;
    std::vector<ControllerNode> nodes_;
    std::vector<Eigen::VectorXd> values_;
    std::vector<NodeId> redirect_;
    bool changed_ = false;
    bool added_ = false;
};

struct ImprovementResult {
    FiniteStateController controller;
    bool changed = false;
    bool added = false;
    /// Nodes of `controller` that correspond to some vector of Vnew.
    std::vector<NodeId> corresponding;
    /// The node of `controller` each vector of Vnew ended up in, in order.
    std::vector<NodeId> vector_nodes;
};

/// Policy-improvement transformation driven by a DP-update output whose
/// successor annotations index the nodes of fsc.
ImprovementResult apply_improvement(const FiniteStateController& fsc, const VectorSet& Vdelta, const VectorSet& Vnew,
                                    const Tolerances& tol = {});

/// Keeps only nodes reachable from roots, compacting indices.
FiniteStateController prune_unreachable(const FiniteStateController& fsc, const std::vector<NodeId>& roots);

/// Same as prune_unreachable, also returning old index -> new index (or
/// kNoSuccessor for removed nodes).
std::pair<FiniteStateController, std::vector<NodeId>> prune_unreachable_mapped(const FiniteStateController& fsc,
                                                                             const std::vector<NodeId>& roots);

/// Machine state that maximizes the value of b0; ties go to the lowest index.
NodeId start_node(const FiniteStateController& fsc, const VectorSet& V, const Belief& b0);

struct Step {
    ActionId action;
    NodeId next;
};
Step step_controller(const FiniteStateController& fsc, NodeId node, ObsId z);

}  // namespace fscpomdp
