#include "fscpomdp/controller_io.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace fscpomdp {

using json = nlohmann::ordered_json;

ControllerDocument make_document(const PomdpModel& model, FiniteStateController fsc, VectorSet values,
                                 ControllerMetadata meta) {
    return {model.state_names(),  model.action_names(), model.observation_names(),
            std::move(fsc),       std::move(values),    std::move(meta)};
}

std::string node_name(NodeId i) { return "n" + std::to_string(i); }

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

namespace {

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> read_optional_number(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name, const char* what) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw ControllerFormatError(std::string("unknown ") + what + " '" + name + "'");
}

}  // namespace

std::string serialize_controller(const ControllerDocument& doc) {
    const auto& fsc = doc.controller;
    if (doc.values.size() != fsc.size()) throw std::invalid_argument("values do not match the controller");
    json j;
    j["format"] = kControllerFormat;
    j["version"] = kControllerVersion;
    j["model"] = {{"states", doc.state_names},
                  {"actions", doc.action_names},
                  {"observations", doc.observation_names}};
    json meta;
    meta["solver"] = doc.meta.solver;
    meta["epsilon"] = doc.meta.epsilon;
    meta["status"] = doc.meta.status;
    meta["iterations"] = doc.meta.iterations;
    meta["seed"] = doc.meta.seed ? json(*doc.meta.seed) : json(nullptr);
    meta["lower"] = optional_number(doc.meta.lower);
    meta["upper"] = optional_number(doc.meta.upper);
    j["metadata"] = meta;
    json start;
    start["rule"] = doc.meta.start_rule;
    start["node"] = node_name(doc.meta.start_node);
    start["belief"] = doc.meta.start_belief ? json(*doc.meta.start_belief) : json(nullptr);
    j["start"] = start;

    json nodes = json::array();
    for (NodeId i = 0; i < fsc.size(); ++i) {
        const auto& n = fsc.node(i);
        json node;
        node["name"] = node_name(i);
        node["action"] = doc.action_names.at(n.action);
        json succ = json::object();
        for (ObsId z = 0; z < n.successors.size(); ++z) succ[doc.observation_names.at(z)] = node_name(n.successors[z]);
        node["successors"] = succ;
        const auto& v = doc.values[i].values;
        node["values"] = std::vector<double>(v.data(), v.data() + v.size());
        node["tag"] = n.tag;
        nodes.push_back(node);
    }
    j["nodes"] = nodes;
    return j.dump(2) + "\n";
}

ControllerDocument parse_controller(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != kControllerFormat)
            throw ControllerFormatError("not a controller document");
        if (j.at("version").get<int>() != kControllerVersion) throw ControllerFormatError("unsupported version");

        const auto states = j.at("model").at("states").get<std::vector<std::string>>();
        const auto actions = j.at("model").at("actions").get<std::vector<std::string>>();
        const auto observations = j.at("model").at("observations").get<std::vector<std::string>>();

        const json& jn = j.at("nodes");
        std::vector<std::string> names;
        for (const auto& n : jn) names.push_back(n.at("name").get<std::string>());

        std::vector<ControllerNode> nodes;
        VectorSet values;
        for (const auto& n : jn) {
            ControllerNode node;
            node.action = index_of(actions, n.at("action").get<std::string>(), "action");
            const json& succ = n.at("successors");
            if (succ.size() != observations.size()) throw ControllerFormatError("wrong number of successors");
            node.successors.resize(observations.size());
            for (ObsId z = 0; z < observations.size(); ++z)
                node.successors[z] = index_of(names, succ.at(observations[z]).get<std::string>(), "node");
            node.tag = n.value("tag", "");
            const auto v = n.at("values").get<std::vector<double>>();
            if (v.size() != states.size()) throw ControllerFormatError("value vector has the wrong length");
            ValueVector vv;
            vv.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
            vv.action = node.action;
            vv.successors = node.successors;
            values.vectors.push_back(std::move(vv));
            nodes.push_back(std::move(node));
        }
        if (nodes.empty()) throw ControllerFormatError("controller has no nodes");

        ControllerMetadata meta;
        const json& m = j.at("metadata");
        meta.solver = m.at("solver").get<std::string>();
        meta.epsilon = m.at("epsilon").get<double>();
        meta.status = m.at("status").get<std::string>();
        meta.iterations = m.at("iterations").get<int>();
        if (!m.at("seed").is_null()) meta.seed = m.at("seed").get<std::uint64_t>();
        meta.lower = read_optional_number(m, "lower");
        meta.upper = read_optional_number(m, "upper");
        const json& st = j.at("start");
        meta.start_rule = st.at("rule").get<std::string>();
        meta.start_node = index_of(names, st.at("node").get<std::string>(), "node");
        if (!st.at("belief").is_null()) meta.start_belief = st.at("belief").get<std::vector<double>>();

        return {states, actions, observations, FiniteStateController(observations.size(), std::move(nodes)),
                std::move(values), std::move(meta)};
    } catch (const json::exception& e) {
        throw ControllerFormatError(std::string("malformed controller document: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ControllerFormatError(e.what());
    }
}

void check_compatible(const ControllerDocument& doc, const PomdpModel& model) {
    if (doc.state_names != model.state_names() || doc.action_names != model.action_names() ||
        doc.observation_names != model.observation_names())
        throw ControllerFormatError("controller was built for a different model");
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string controller_dot(const FiniteStateController& fsc, const std::vector<std::string>& action_names,
                           const std::vector<std::string>& observation_names, std::optional<NodeId> start) {
    std::ostringstream os;
    os << "digraph controller {\n  rankdir=LR;\n  node [shape=circle];\n";
    for (NodeId i = 0; i < fsc.size(); ++i) {
        os << "  " << node_name(i) << " [label=\"" << i << ": " << dot_escape(action_names.at(fsc.node(i).action))
           << "\"";
        if (start && *start == i) os << ", shape=doublecircle";
        os << "];\n";
    }
    for (NodeId i = 0; i < fsc.size(); ++i) {
        const auto& n = fsc.node(i);
        for (ObsId z = 0; z < n.successors.size(); ++z)
            os << "  " << node_name(i) << " -> " << node_name(n.successors[z]) << " [label=\""
               << dot_escape(observation_names.at(z)) << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

std::string policy_iteration_trace_csv(const IterationStats& stats, bool timing) {
    std::ostringstream os;
    os << "iteration,nodes,dp_vectors,residual,probe_value,elapsed\n";
    for (const auto& r : stats.records)
        os << r.iteration << ',' << r.controller_nodes << ',' << r.dp_vectors << ',' << format_double(r.residual)
           << ',' << format_double(r.probe_value) << ',' << format_double(timing ? r.elapsed_seconds : 0.0) << '\n';
    return os.str();
}

std::string search_trace_csv(const std::vector<SearchRecord>& trace, bool timing) {
    std::ostringstream os;
    os << "iteration,nodes,lower,upper,gap,tree_nodes,expansions,elapsed\n";
    for (const auto& r : trace)
        os << r.iteration << ',' << r.controller_nodes << ',' << format_double(r.lower) << ','
           << format_double(r.upper) << ',' << format_double(r.upper - r.lower) << ',' << r.tree_nodes << ','
           << r.expansions << ',' << format_double(timing ? r.elapsed_seconds : 0.0) << '\n';
    return os.str();
}

}  // namespace fscpomdp
