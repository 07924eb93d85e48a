#include "fscpomdp/cli.hpp"

#include "CLI11.hpp"
#include "fscpomdp/belief_search.hpp"
#include "fscpomdp/controller_io.hpp"
#include "fscpomdp/pomdp_file.hpp"
#include "fscpomdp/simulate.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fscpomdp::cli {

int exit_code(SolveStatus status) {
    switch (status) {
        case SolveStatus::EpsilonOptimal: return kExitOk;
        case SolveStatus::IterationLimit: return kExitIterationLimit;
        case SolveStatus::NodeLimit:
        case SolveStatus::MemoryLimit: return kExitResourceLimit;
    }
    return kExitData;
}

Belief parse_belief(std::string_view text, const PomdpModel& model) {
    const std::size_t n = model.num_states();
    std::string s(text);
    if (s == "uniform") return Belief::uniform(n);
    const auto& names = model.state_names();
    if (auto it = std::find(names.begin(), names.end(), s); it != names.end())
        return Belief::unit(n, static_cast<StateId>(it - names.begin()));

    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    is.imbue(std::locale::classic());
    std::vector<double> p;
    double x;
    while (is >> x) p.push_back(x);
    if (!is.eof()) throw std::invalid_argument("cannot parse belief '" + std::string(text) + "'");
    if (p.size() == 1 && n > 1 && p[0] == std::floor(p[0]) && p[0] >= 0 && p[0] < static_cast<double>(n))
        return Belief::unit(n, static_cast<StateId>(p[0]));
    if (p.size() != n)
        throw std::invalid_argument("belief needs " + std::to_string(n) + " entries, got " + std::to_string(p.size()));
    for (double v : p)
        if (!(v >= 0.0)) throw std::invalid_argument("belief has a negative entry");
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(n));
    if (std::abs(v.sum() - 1.0) > 1e-9) throw std::invalid_argument("belief does not sum to 1");
    return Belief(v);
}

namespace {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw DataError("cannot write " + path);
}

PomdpFile load_model(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return parse_pomdp_file(text);
    } catch (const std::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

Belief start_belief(const PomdpFile& file, const std::string& override_text) {
    if (override_text.empty()) return file.start_belief();
    try {
        return parse_belief(override_text, file.model);
    } catch (const std::exception& e) {
        throw UsageError(std::string("--start: ") + e.what());
    }
}

ControllerDocument load_controller(const std::string& path, const PomdpModel& model) {
    const std::string text = read_file(path);
    try {
        ControllerDocument doc = parse_controller(text);
        check_compatible(doc, model);
        return doc;
    } catch (const std::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

std::vector<double> to_std(const Belief& b) { return {b.probs().data(), b.probs().data() + b.size()}; }

struct SolveOptions {
    std::string model;
    std::string method = "pi";
    double epsilon = 0.1;
    std::string start;
    int max_iter = 500;
    std::size_t max_nodes = 5000;
    std::size_t memory_limit = 200000;
    std::uint64_t seed = 0;
    std::string out, trace, dot;
    bool timing = false;
};

int solve(const SolveOptions& o, std::ostream& out) {
    const PomdpFile file = load_model(o.model);
    const PomdpModel& model = file.model;
    const Belief b0 = start_belief(file, o.start);

    SolverConfig cfg;
    cfg.epsilon = o.epsilon;
    cfg.max_iterations = o.max_iter;
    cfg.max_nodes = o.max_nodes;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (o.memory_limit == 0) throw UsageError("--memory-limit must be positive");

    ControllerMetadata meta;
    meta.epsilon = o.epsilon;
    meta.seed = o.seed;
    meta.start_belief = to_std(b0);
    std::string trace;
    SolveStatus status;
    FiniteStateController fsc = initial_controller(model);
    VectorSet values;

    if (o.method == "pi") {
        const std::string key = std::filesystem::path(o.model).stem().string();
        auto r = policy_iterate(model, fsc, cfg, key);
        status = r.status;
        meta.solver = "policy-iteration";
        meta.iterations = static_cast<int>(r.stats.records.size());
        meta.lower = evaluate_at(r.values, b0).value;
        if (!r.stats.records.empty())
            meta.upper = *meta.lower + r.stats.records.back().residual / (1.0 - model.discount());
        trace = policy_iteration_trace_csv(r.stats, o.timing);
        fsc = std::move(r.controller);
        values = std::move(r.values);
    } else {
        auto r = heuristic_search_solve(model, b0, fsc, cfg, o.memory_limit);
        status = r.status;
        meta.solver = "heuristic-search";
        meta.iterations = static_cast<int>(r.trace.size());
        meta.lower = r.lower;
        meta.upper = r.upper;
        trace = search_trace_csv(r.trace, o.timing);
        fsc = std::move(r.controller);
        values = std::move(r.values);
    }
    meta.status = std::string(to_string(status));
    meta.start_node = start_node(fsc, values, b0);

    const ControllerDocument doc = make_document(model, fsc, values, meta);
    const std::string text = serialize_controller(doc);
    if (!o.trace.empty()) write_file(o.trace, trace);
    if (!o.dot.empty())
        write_file(o.dot, controller_dot(fsc, model.action_names(), model.observation_names(), meta.start_node));
    if (o.out.empty()) {
        out << text;
    } else {
        write_file(o.out, text);
        out << "status " << meta.status << "\nnodes " << fsc.size() << "\niterations " << meta.iterations
            << "\nlower " << format_double(*meta.lower) << "\nupper "
            << (meta.upper ? format_double(*meta.upper) : "none") << "\n";
    }
    return exit_code(status);
}

int evaluate(const std::string& model_path, const std::string& controller_path, const std::string& start,
             std::ostream& out) {
    const PomdpFile file = load_model(model_path);
    const ControllerDocument doc = load_controller(controller_path, file.model);
    const Belief b0 = start_belief(file, start);
    const VectorSet V = evaluate_controller(file.model, doc.controller);
    const Evaluation e = evaluate_at(V, b0);
    out << "value " << format_double(e.value) << "\nstart_node " << node_name(e.index) << "\n";
    return kExitOk;
}

int simulate_cmd(const std::string& model_path, const std::string& controller_path, const std::string& start,
                 std::size_t episodes, int horizon, std::uint64_t seed, std::ostream& out) {
    const PomdpFile file = load_model(model_path);
    const ControllerDocument doc = load_controller(controller_path, file.model);
    const Belief b0 = start_belief(file, start);
    if (episodes == 0) throw UsageError("--episodes must be positive");
    if (horizon <= 0) horizon = truncation_horizon(file.model);
    const VectorSet V = evaluate_controller(file.model, doc.controller);
    const NodeId q0 = start_node(doc.controller, V, b0);
    const SimulationResult r = simulate(file.model, doc.controller, q0, b0, episodes, horizon, seed);
    out << "mean " << format_double(r.mean) << "\nstd_error " << format_double(r.std_error) << "\nepisodes "
        << r.episodes << "\nhorizon " << r.horizon << "\nanalytic " << format_double(evaluate_at(V, b0).value)
        << "\n";
    return kExitOk;
}

int info(const std::string& model_path, std::ostream& out) {
    const PomdpFile file = load_model(model_path);
    const PomdpModel& m = file.model;
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
        return s;
    };
    const Belief b0 = file.start_belief();
    std::string belief;
    for (StateId s = 0; s < b0.size(); ++s) belief += (s ? " " : "") + format_double(b0[s]);
    out << "states " << m.num_states() << " : " << join(m.state_names()) << "\n"
        << "actions " << m.num_actions() << " : " << join(m.action_names()) << "\n"
        << "observations " << m.num_observations() << " : " << join(m.observation_names()) << "\n"
        << "discount " << format_double(m.discount()) << "\n"
        << "values " << (file.cost ? "cost" : "reward") << "\n"
        << "start " << (file.start ? "declared" : "uniform (default)") << " : " << belief << "\n"
        << "max_abs_reward " << format_double(m.max_abs_reward()) << "\n"
        << "mdp_bound_at_start " << format_double(mdp_upper_bound(m).upper(b0)) << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-state controller solvers for discrete POMDPs", "fscpomdp"};
    app.require_subcommand(1);

    SolveOptions so;
    auto* solve_cmd = app.add_subcommand("solve", "Solve a model and write a controller");
    solve_cmd->add_option("model", so.model, "Model file (.pomdp)")->required();
    solve_cmd->add_option("--method", so.method, "pi (policy iteration) or hs (heuristic search)")
        ->check(CLI::IsMember({"pi", "hs"}));
    solve_cmd->add_option("--epsilon", so.epsilon, "Error bound");
    solve_cmd->add_option("--start", so.start, "Start belief: uniform, a state, or probabilities");
    solve_cmd->add_option("--max-iter", so.max_iter, "Outer iteration limit");
    solve_cmd->add_option("--max-nodes", so.max_nodes, "Controller size limit");
    solve_cmd->add_option("--memory-limit", so.memory_limit, "OR-node limit of one search tree");
    solve_cmd->add_option("--seed", so.seed, "Seed recorded with the controller");
    solve_cmd->add_option("--out", so.out, "Controller document path (stdout when omitted)");
    solve_cmd->add_option("--trace", so.trace, "Per-iteration CSV path");
    solve_cmd->add_option("--dot", so.dot, "Graphviz output path");
    solve_cmd->add_flag("--timing", so.timing, "Record wall-clock seconds in the trace");

    std::string model, controller, start;
    auto* eval_cmd = app.add_subcommand("evaluate", "Value of a controller at a belief");
    eval_cmd->add_option("model", model, "Model file")->required();
    eval_cmd->add_option("controller", controller, "Controller document")->required();
    eval_cmd->add_option("--start", start, "Belief (default: the model's start)");

    std::size_t episodes = 100000;
    int horizon = 0;
    std::uint64_t seed = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo return of a controller");
    sim_cmd->add_option("model", model, "Model file")->required();
    sim_cmd->add_option("controller", controller, "Controller document")->required();
    sim_cmd->add_option("--start", start, "Belief (default: the model's start)");
    sim_cmd->add_option("--episodes", episodes, "Episode count");
    sim_cmd->add_option("--horizon", horizon, "Steps per episode (0: truncation rule)");
    sim_cmd->add_option("--seed", seed, "Random seed");

    auto* info_cmd = app.add_subcommand("info", "Summarize a model");
    info_cmd->add_option("model", model, "Model file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (solve_cmd->parsed()) return solve(so, out);
        if (eval_cmd->parsed()) return evaluate(model, controller, start, out);
        if (sim_cmd->parsed()) return simulate_cmd(model, controller, start, episodes, horizon, seed, out);
        if (info_cmd->parsed()) return info(model, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace fscpomdp::cli
