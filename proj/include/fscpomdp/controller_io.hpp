#pragma once

#include "fscpomdp/belief_search.hpp"
#include "fscpomdp/controller.hpp"
#include "fscpomdp/model.hpp"
#include "fscpomdp/policy_iteration.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fscpomdp {

inline constexpr std::string_view kControllerFormat = "fscpomdp-controller";
inline constexpr int kControllerVersion = 1;

class ControllerFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ControllerMetadata {
    std::string solver;  // "policy-iteration" or "heuristic-search"
    double epsilon = 0.0;
    std::string status;
    int iterations = 0;
    std::optional<std::uint64_t> seed;
    std::string start_rule = "argmax value at the start belief, lowest index on ties";
    NodeId start_node = 0;
    std::optional<std::vector<double>> start_belief;
    std::optional<double> lower;
    std::optional<double> upper;
};

struct ControllerDocument {
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    std::vector<std::string> observation_names;
    FiniteStateController controller;
    VectorSet values;
    ControllerMetadata meta;
};

/// Builds a document using the model's names.
ControllerDocument make_document(const PomdpModel& model, FiniteStateController fsc, VectorSet values,
                                 ControllerMetadata meta);

/// Machine state i is named "n<i>".
std::string node_name(NodeId i);

/// Pretty-printed JSON with a fixed key order; doubles are written with
/// round-trip precision.
std::string serialize_controller(const ControllerDocument& doc);

/// Inverse of serialize_controller. Throws ControllerFormatError.
ControllerDocument parse_controller(std::string_view text);

/// Checks that a document's names and dimensions fit a model.
void check_compatible(const ControllerDocument& doc, const PomdpModel& model);

/// Graphviz digraph: one node per machine state labeled "<i>: <action>",
/// one edge per (node, observation) labeled with the observation name.
std::string controller_dot(const FiniteStateController& fsc, const std::vector<std::string>& action_names,
                           const std::vector<std::string>& observation_names,
                           std::optional<NodeId> start = std::nullopt);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

/// Header: iteration,nodes,dp_vectors,residual,probe_value,elapsed
std::string policy_iteration_trace_csv(const IterationStats& stats, bool timing);

/// Header: iteration,nodes,lower,upper,gap,tree_nodes,expansions,elapsed
std::string search_trace_csv(const std::vector<SearchRecord>& trace, bool timing);

}  // namespace fscpomdp
