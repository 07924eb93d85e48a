#include "fscpomdp/belief_search.hpp"
#include "fscpomdp/controller_io.hpp"
#include "fscpomdp/policy_iteration.hpp"
#include "fscpomdp/pomdp_file.hpp"
#include "fscpomdp/simulate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fscpomdp;

namespace {

using Tensor3 = std::vector<std::vector<std::vector<double>>>;

PomdpModel make_model(const Tensor3& transition, const Tensor3& observation,
                      const std::vector<std::vector<double>>& reward, double discount) {
    RawModel raw;
    raw.transition = transition;
    raw.observation = observation;
    raw.reward = reward;
    raw.discount = discount;
    return validate_model(raw);
}

Eigen::MatrixXd as_matrix(const VectorSet& V) {
    if (V.empty()) return {};
    Eigen::MatrixXd M(static_cast<Eigen::Index>(V.size()), V.vectors[0].values.size());
    for (std::size_t i = 0; i < V.size(); ++i) M.row(static_cast<Eigen::Index>(i)) = V.vectors[i].values.transpose();
    return M;
}

VectorSet from_matrix(const Eigen::MatrixXd& rows) {
    VectorSet V;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) V.vectors.push_back({rows.row(i).transpose(), 0, {}});
    return V;
}

SolverConfig make_config(double epsilon, int max_iterations, std::size_t max_nodes) {
    SolverConfig cfg;
    cfg.epsilon = epsilon;
    cfg.max_iterations = max_iterations;
    cfg.max_nodes = max_nodes;
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Finite-state controller solvers for discrete POMDPs";

    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<PomdpParseError>(m, "PomdpParseError", PyExc_ValueError);
    py::register_exception<ImpossibleObservation>(m, "ImpossibleObservation", PyExc_ValueError);
    py::register_exception<ControllerFormatError>(m, "ControllerFormatError", PyExc_ValueError);

    py::class_<PomdpModel>(m, "PomdpModel")
        .def_property_readonly("num_states", &PomdpModel::num_states)
        .def_property_readonly("num_actions", &PomdpModel::num_actions)
        .def_property_readonly("num_observations", &PomdpModel::num_observations)
        .def_property_readonly("discount", &PomdpModel::discount)
        .def_property_readonly("state_names", &PomdpModel::state_names)
        .def_property_readonly("action_names", &PomdpModel::action_names)
        .def_property_readonly("observation_names", &PomdpModel::observation_names)
        .def("transition_matrix", &PomdpModel::transition_matrix, py::arg("action"))
        .def("observation_matrix", &PomdpModel::observation_matrix, py::arg("action"))
        .def_property_readonly("reward_matrix", &PomdpModel::reward_matrix);

    m.def("make_model", &make_model, py::arg("transition"), py::arg("observation"), py::arg("reward"),
          py::arg("discount"), "Build a model from T[a][s][s'], O[a][s'][z] and R[s][a].");

    py::class_<PomdpFile>(m, "PomdpFile")
        .def_readonly("model", &PomdpFile::model)
        .def_readonly("cost", &PomdpFile::cost)
        .def_property_readonly("start", [](const PomdpFile& f) { return f.start_belief().probs(); });
    m.def("parse_pomdp", &parse_pomdp_file, py::arg("text"));
    m.def("load_pomdp", &load_pomdp_file, py::arg("path"));

    m.def(
        "belief_update",
        [](const PomdpModel& model, const Eigen::VectorXd& b, ActionId a, ObsId z) {
            return belief_update(model, Belief(b), a, z).probs();
        },
        py::arg("model"), py::arg("belief"), py::arg("action"), py::arg("observation"));
    m.def(
        "observation_probability",
        [](const PomdpModel& model, const Eigen::VectorXd& b, ActionId a) {
            return observation_probability(model, Belief(b), a);
        },
        py::arg("model"), py::arg("belief"), py::arg("action"));

    m.def(
        "dp_update",
        [](const PomdpModel& model, const Eigen::MatrixXd& V) { return as_matrix(dp_update(model, from_matrix(V))); },
        py::arg("model"), py::arg("vectors"), "One exact backup; vectors are rows.");
    m.def(
        "prune", [](const Eigen::MatrixXd& V) { return as_matrix(prune_to_minimal(from_matrix(V))); },
        py::arg("vectors"));
    m.def(
        "bellman_residual",
        [](const Eigen::MatrixXd& V, const Eigen::MatrixXd& W) { return bellman_residual(from_matrix(V), from_matrix(W)); },
        py::arg("before"), py::arg("after"));
    m.def(
        "value_at", [](const Eigen::MatrixXd& V, const Eigen::VectorXd& b) { return evaluate_at(from_matrix(V), b).value; },
        py::arg("vectors"), py::arg("belief"));

    py::class_<FiniteStateController>(m, "Controller")
        .def(py::init([](std::size_t num_obs, const std::vector<std::pair<ActionId, std::vector<NodeId>>>& nodes) {
                 std::vector<ControllerNode> ns;
                 for (const auto& [a, succ] : nodes) ns.push_back({a, succ, ""});
                 return FiniteStateController(num_obs, std::move(ns));
             }),
             py::arg("num_observations"), py::arg("nodes"), "nodes: list of (action, successor per observation)")
        .def("__len__", &FiniteStateController::size)
        .def("action", [](const FiniteStateController& f, NodeId i) { return f.node(i).action; })
        .def("successors", [](const FiniteStateController& f, NodeId i) { return f.node(i).successors; })
        .def("tag", [](const FiniteStateController& f, NodeId i) { return f.node(i).tag; });

    m.def("initial_controller", &initial_controller, py::arg("model"));
    m.def(
        "evaluate_controller",
        [](const PomdpModel& model, const FiniteStateController& fsc) {
            return as_matrix(evaluate_controller(model, fsc));
        },
        py::arg("model"), py::arg("controller"), "Node value vectors as rows.");
    m.def(
        "start_node",
        [](const PomdpModel& model, const FiniteStateController& fsc, const Eigen::VectorXd& b0) {
            return start_node(fsc, evaluate_controller(model, fsc), Belief(b0));
        },
        py::arg("model"), py::arg("controller"), py::arg("belief"));
    m.def("mdp_bound", [](const PomdpModel& model, const Eigen::VectorXd& b) { return mdp_upper_bound(model).upper(Belief(b)); },
          py::arg("model"), py::arg("belief"));
    m.def("residual_threshold", &residual_threshold, py::arg("epsilon"), py::arg("discount"));

    m.def(
        "policy_iterate",
        [](const PomdpModel& model, double epsilon, int max_iterations, std::size_t max_nodes) {
            auto res = policy_iterate(model, initial_controller(model), make_config(epsilon, max_iterations, max_nodes));
            py::dict d;
            d["status"] = std::string(to_string(res.status));
            d["controller"] = res.controller;
            d["values"] = as_matrix(res.values);
            d["iterations"] = res.stats.records.size();
            d["residuals"] = [&] {
                std::vector<double> r;
                for (const auto& rec : res.stats.records) r.push_back(rec.residual);
                return r;
            }();
            return d;
        },
        py::arg("model"), py::arg("epsilon") = 0.1, py::arg("max_iterations") = 500, py::arg("max_nodes") = 5000);

    m.def(
        "heuristic_search",
        [](const PomdpModel& model, const Eigen::VectorXd& b0, double epsilon, int max_iterations,
           std::size_t max_nodes, std::size_t memory_limit) {
            auto res = heuristic_search_solve(model, Belief(b0), initial_controller(model),
                                              make_config(epsilon, max_iterations, max_nodes), memory_limit);
            py::dict d;
            d["status"] = std::string(to_string(res.status));
            d["controller"] = res.controller;
            d["values"] = as_matrix(res.values);
            d["lower"] = res.lower;
            d["upper"] = res.upper;
            d["iterations"] = res.trace.size();
            return d;
        },
        py::arg("model"), py::arg("belief"), py::arg("epsilon") = 0.1, py::arg("max_iterations") = 500,
        py::arg("max_nodes") = 5000, py::arg("memory_limit") = 200000);

    py::class_<SimulationResult>(m, "SimulationResult")
        .def_readonly("mean", &SimulationResult::mean)
        .def_readonly("std_error", &SimulationResult::std_error)
        .def_readonly("episodes", &SimulationResult::episodes)
        .def_readonly("horizon", &SimulationResult::horizon);
    m.def(
        "simulate",
        [](const PomdpModel& model, const FiniteStateController& fsc, NodeId start, const Eigen::VectorXd& b0,
           std::size_t episodes, int horizon, std::uint64_t seed, unsigned threads) {
            py::gil_scoped_release release;
            if (horizon <= 0) horizon = truncation_horizon(model);
            return simulate(model, fsc, start, Belief(b0), episodes, horizon, seed, threads);
        },
        py::arg("model"), py::arg("controller"), py::arg("start"), py::arg("belief"), py::arg("episodes") = 100000,
        py::arg("horizon") = 0, py::arg("seed") = 0, py::arg("threads") = 0);

    m.def(
        "controller_json",
        [](const PomdpModel& model, const FiniteStateController& fsc, const Eigen::VectorXd& b0,
           const std::string& solver) {
            auto values = evaluate_controller(model, fsc);
            ControllerMetadata meta;
            meta.solver = solver;
            meta.start_node = start_node(fsc, values, Belief(b0));
            meta.start_belief = std::vector<double>(b0.data(), b0.data() + b0.size());
            meta.lower = evaluate_at(values, b0).value;
            return serialize_controller(make_document(model, fsc, std::move(values), std::move(meta)));
        },
        py::arg("model"), py::arg("controller"), py::arg("belief"), py::arg("solver") = "python");
    m.def(
        "load_controller_json",
        [](const std::string& text) {
            auto doc = parse_controller(text);
            return py::make_tuple(doc.controller, doc.meta.start_node);
        },
        py::arg("text"), "Returns (controller, start node).");
    m.def(
        "controller_dot",
        [](const PomdpModel& model, const FiniteStateController& fsc, std::optional<NodeId> start) {
            return controller_dot(fsc, model.action_names(), model.observation_names(), start);
        },
        py::arg("model"), py::arg("controller"), py::arg("start") = py::none());
}
