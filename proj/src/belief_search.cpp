#include "fscpomdp/belief_search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

namespace fscpomdp {

MdpBound mdp_upper_bound(const PomdpModel& model) {
    const std::size_t ns = model.num_states();
    const double beta = model.discount();
    const double rmax = model.reward_matrix().maxCoeff();
    Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(ns), rmax / (1.0 - beta));
    for (;;) {
        Eigen::VectorXd next = model.reward_vector(0) + beta * model.transition_matrix(0) * v;
        for (ActionId a = 1; a < model.num_actions(); ++a)
            next = next.cwiseMax(model.reward_vector(a) + beta * model.transition_matrix(a) * v);
        const double residual = (next - v).cwiseAbs().maxCoeff();
        v = std::move(next);
        if (residual <= 1e-10) break;
    }
    return MdpBound(std::move(v));
}

namespace {

struct Candidate {
    double score;
    int depth;
    std::size_t id;
};

bool better(const Candidate& x, const Candidate& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.depth != y.depth) return x.depth < y.depth;
    return x.id < y.id;
}

}  // namespace

SearchTree::SearchTree(const PomdpModel& model, const BeliefBound& bound, const VectorSet& lower_values,
                       Belief root_belief, double improvement_tol)
    : model_(&model), bound_(&bound), values_(&lower_values), improvement_tol_(improvement_tol) {
    if (root_belief.size() != model.num_states()) throw std::invalid_argument("start belief has the wrong dimension");
    add_or(std::move(root_belief), 0, 1.0, kNoSuccessor);
}

std::size_t SearchTree::add_or(Belief b, int depth, double reach, std::size_t parent) {
    const double lower = evaluate_at(*values_, b).value;
    const double upper = bound_->upper(b);
    OrNode n{std::move(b)};
    n.lower = lower;
    n.upper = upper;
    n.initial_lower = lower;
    n.depth = depth;
    n.reach_prob = reach;
    n.parent = parent;
    n.best_score = std::max(0.0, upper - lower);
    n.best_depth = depth;
    n.best_fringe = or_nodes_.size();
    or_nodes_.push_back(std::move(n));
    return or_nodes_.size() - 1;
}

void SearchTree::refresh_and(std::size_t i) {
    AndNode& an = and_nodes_[i];
    const OrNode& parent = or_nodes_[an.parent];
    const double beta = model_->discount();
    const double rho = expected_reward(*model_, parent.belief, an.action);
    double lo = 0.0, hi = 0.0;
    std::optional<Candidate> best;
    for (std::size_t z = 0; z < an.children.size(); ++z) {
        if (an.children[z] == kNoSuccessor) continue;
        const OrNode& child = or_nodes_[an.children[z]];
        lo += an.probs[z] * child.lower;
        hi += an.probs[z] * child.upper;
        const Candidate c{beta * an.probs[z] * child.best_score, child.best_depth, child.best_fringe};
        if (!best || better(c, *best)) best = c;
    }
    an.lower = rho + beta * lo;
    an.upper = rho + beta * hi;
    if (best) {
        an.best_score = best->score;
        an.best_depth = best->depth;
        an.best_fringe = best->id;
    }
}

void SearchTree::refresh_or(std::size_t i) {
    OrNode& n = or_nodes_[i];
    if (n.fringe()) {
        n.best_score = std::max(0.0, n.upper - n.lower);
        n.best_depth = n.depth;
        n.best_fringe = i;
        return;
    }
    ActionId lo_a = 0, hi_a = 0;
    for (ActionId a = 1; a < n.children.size(); ++a) {
        if (and_nodes_[n.children[a]].lower > and_nodes_[n.children[lo_a]].lower) lo_a = a;
        if (and_nodes_[n.children[a]].upper > and_nodes_[n.children[hi_a]].upper) hi_a = a;
    }
    const AndNode& lo_node = and_nodes_[n.children[lo_a]];
    const AndNode& hi_node = and_nodes_[n.children[hi_a]];
    n.lower = lo_node.lower;
    n.upper = hi_node.upper;
    n.lower_action = lo_a;
    n.best_action = hi_a;
    n.improved = n.lower > n.initial_lower + improvement_tol_;
    if (n.improved)
        n.chosen_successors = lo_node.children;
    else
        n.chosen_successors.clear();
    n.best_score = hi_node.best_score;
    n.best_depth = hi_node.best_depth;
    n.best_fringe = hi_node.best_fringe;
}

void SearchTree::expand_node(std::size_t i) {
    if (!or_nodes_.at(i).fringe()) throw std::logic_error("expand_node: node already expanded");
    const std::size_t nz = model_->num_observations();
    std::vector<std::size_t> and_ids;
    for (ActionId a = 0; a < model_->num_actions(); ++a) {
        const Belief b = or_nodes_[i].belief;
        const int depth = or_nodes_[i].depth + 1;
        const double reach = or_nodes_[i].reach_prob;
        const Eigen::VectorXd pz = observation_probability(*model_, b, a);

        const std::size_t and_id = and_nodes_.size();
        AndNode an;
        an.action = a;
        an.parent = i;
        an.probs.assign(nz, 0.0);
        an.children.assign(nz, kNoSuccessor);
        and_nodes_.push_back(std::move(an));
        for (ObsId z = 0; z < nz; ++z) {
            const double p = pz[static_cast<Eigen::Index>(z)];
            if (!(p > 0.0)) continue;
            const std::size_t child = add_or(belief_update(*model_, b, a, z), depth, reach * p, and_id);
            and_nodes_[and_id].probs[z] = p;
            and_nodes_[and_id].children[z] = child;
        }
        refresh_and(and_id);
        and_ids.push_back(and_id);
    }
    or_nodes_[i].children = std::move(and_ids);
    refresh_or(i);
    ++expansions_;
}

void SearchTree::backup_bounds(std::size_t from) {
    std::size_t n = from;
    refresh_or(n);
    while (or_nodes_[n].parent != kNoSuccessor) {
        const std::size_t a = or_nodes_[n].parent;
        refresh_and(a);
        n = and_nodes_[a].parent;
        refresh_or(n);
    }
}

std::size_t SearchTree::select_fringe_node() {
    const OrNode& r = or_nodes_[root()];
    if (!(r.best_score > 0.0)) throw SearchExhausted("no fringe node with a positive bound gap");
    const std::size_t f = r.best_fringe;

    std::vector<std::size_t> path;
    for (std::size_t n = f;;) {
        path.push_back(n);
        if (or_nodes_[n].parent == kNoSuccessor) break;
        n = and_nodes_[or_nodes_[n].parent].parent;
    }
    double reach = 1.0;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        OrNode& n = or_nodes_[*it];
        if (n.parent != kNoSuccessor) {
            const AndNode& an = and_nodes_[n.parent];
            for (std::size_t z = 0; z < an.children.size(); ++z)
                if (an.children[z] == *it) reach *= an.probs[z];
        }
        n.reach_prob = reach;
    }
    return f;
}

ExtractionResult extract_improvements(const SearchTree& tree, const FiniteStateController& fsc, const VectorSet& V,
                                      const Tolerances& tol, const std::string& tag) {
    const OrNode& root = tree.node(tree.root());
    if (!root.improved) throw std::logic_error("extract_improvements: root lower bound was not improved");
    const PomdpModel& model = tree.model();
    const std::size_t nz = model.num_observations();
    const double beta = model.discount();

    // Improved nodes reachable under the lower-bound-greedy policy.
    std::vector<std::size_t> improved;
    std::vector<std::size_t> stack{tree.root()};
    while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        improved.push_back(n);
        for (std::size_t child : tree.node(n).chosen_successors)
            if (child != kNoSuccessor && tree.node(child).improved) stack.push_back(child);
    }
    std::sort(improved.begin(), improved.end(), [&](std::size_t x, std::size_t y) {
        const int dx = tree.node(x).depth, dy = tree.node(y).depth;
        return dx != dy ? dx > dy : x < y;
    });

    auto fallback_successor = [&](ActionId a, ObsId z) {
        NodeId best = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        for (NodeId k = 0; k < V.size(); ++k) {
            const double val = backproject(model, a, z, V[k].values).sum();
            if (val > best_val) {
                best_val = val;
                best = k;
            }
        }
        return best;
    };

    ControllerEditor editor(fsc, V, tol);
    std::unordered_map<std::size_t, NodeId> machine_of;
    for (std::size_t n : improved) {
        const OrNode& node = tree.node(n);
        const ActionId a = *node.lower_action;
        std::vector<NodeId> succ(nz);
        for (ObsId z = 0; z < nz; ++z) {
            const std::size_t child = node.chosen_successors[z];
            if (child == kNoSuccessor) {
                succ[z] = fallback_successor(a, z);
            } else if (auto it = machine_of.find(child); it != machine_of.end()) {
                succ[z] = it->second;
            } else {
                succ[z] = evaluate_at(V, tree.node(child).belief).index;
            }
        }
        Eigen::VectorXd values = model.reward_vector(a);
        for (ObsId z = 0; z < nz; ++z) values += beta * backproject(model, a, z, editor.values(succ[z]));
        machine_of[n] = editor.integrate(a, std::move(succ), values, tag).node;
    }

    auto finished = editor.finish();
    VectorSet full = evaluate_controller(model, finished.controller);
    const NodeId start = start_node(finished.controller, full, root.belief);
    auto [pruned, map] = prune_unreachable_mapped(finished.controller, {start});

    VectorSet values;
    values.generation = V.generation + 1;
    values.vectors.resize(pruned.size());
    for (NodeId k = 0; k < finished.controller.size(); ++k)
        if (map[k] != kNoSuccessor) values.vectors[map[k]] = full.vectors[k];
    for (NodeId k = 0; k < pruned.size(); ++k) values.vectors[k].successors = pruned.node(k).successors;

    return {std::move(pruned), std::move(values), editor.changed(), editor.added(), map[start]};
}

HeuristicSearchResult heuristic_search_solve(const PomdpModel& model, const Belief& b0,
                                             const FiniteStateController& fsc0, const SolverConfig& cfg,
                                             std::size_t memory_limit, const BeliefBound* bound) {
    using Clock = std::chrono::steady_clock;
    cfg.validate();
    if (memory_limit == 0) throw std::invalid_argument("memory limit must be positive");
    std::optional<MdpBound> own_bound;
    if (bound == nullptr) {
        own_bound.emplace(mdp_upper_bound(model));
        bound = &*own_bound;
    }

    HeuristicSearchResult res{fsc0, evaluate_controller(model, fsc0)};
    double best_upper = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        const auto t0 = Clock::now();
        const double controller_value = evaluate_at(res.values, b0).value;
        SearchTree tree(model, *bound, res.values, b0, cfg.tolerances.equality);

        enum class PhaseEnd { Improved, Converged, Memory };
        PhaseEnd end;
        for (;;) {
            const OrNode& root = tree.node(tree.root());
            best_upper = std::min(best_upper, root.upper);
            if (root.improved) {
                end = PhaseEnd::Improved;
                break;
            }
            if (best_upper - root.lower <= cfg.epsilon) {
                end = PhaseEnd::Converged;
                break;
            }
            if (tree.or_count() >= memory_limit) {
                end = PhaseEnd::Memory;
                break;
            }
            const std::size_t f = tree.select_fringe_node();
            tree.expand_node(f);
            tree.backup_bounds(f);
        }

        SearchRecord rec;
        rec.iteration = iter;
        rec.controller_nodes = res.controller.size();
        rec.lower = controller_value;
        rec.upper = best_upper;
        rec.tree_nodes = tree.or_count();
        rec.expansions = tree.expansions();

        res.lower = controller_value;
        res.upper = best_upper;

        if (end == PhaseEnd::Improved) {
            ExtractionResult ext =
                extract_improvements(tree, res.controller, res.values, cfg.tolerances, "hs-i" + std::to_string(iter));
            res.controller = std::move(ext.controller);
            res.values = std::move(ext.values);
            res.lower = evaluate_at(res.values, b0).value;
            rec.elapsed_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            res.trace.push_back(rec);
            if (res.controller.size() > cfg.max_nodes) {
                res.status = SolveStatus::NodeLimit;
                return res;
            }
            continue;
        }
        rec.elapsed_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        res.trace.push_back(rec);
        res.status = end == PhaseEnd::Converged ? SolveStatus::EpsilonOptimal : SolveStatus::MemoryLimit;
        return res;
    }
    res.status = SolveStatus::IterationLimit;
    return res;
}

}  // namespace fscpomdp
