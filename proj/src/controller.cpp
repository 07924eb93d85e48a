#include "fscpomdp/controller.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <deque>

namespace fscpomdp {

FiniteStateController::FiniteStateController(std::size_t num_observations, std::vector<ControllerNode> nodes)
    : num_obs_(num_observations), nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::invalid_argument("controller must have at least one node");
    for (const auto& n : nodes_) {
        if (n.successors.size() != num_obs_)
            throw std::invalid_argument("controller node needs exactly one successor per observation");
        for (NodeId next : n.successors)
            if (next >= nodes_.size()) throw std::invalid_argument("controller successor index out of range");
    }
}

FiniteStateController FiniteStateController::single_node(std::size_t num_observations, ActionId action,
                                                         std::string tag) {
    return FiniteStateController(num_observations,
                                 {ControllerNode{action, std::vector<NodeId>(num_observations, 0), std::move(tag)}});
}

bool FiniteStateController::structurally_equal(const FiniteStateController& other) const {
    if (num_obs_ != other.num_obs_ || nodes_.size() != other.nodes_.size()) return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].action != other.nodes_[i].action || nodes_[i].successors != other.nodes_[i].successors)
            return false;
    return true;
}

namespace {

void check_compatible(const PomdpModel& model, const FiniteStateController& fsc) {
    if (fsc.num_observations() != model.num_observations())
        throw std::invalid_argument("controller observation count does not match the model");
    for (const auto& n : fsc.nodes())
        if (n.action >= model.num_actions()) throw std::invalid_argument("controller action out of range");
}

Eigen::VectorXd apply_system(const PomdpModel& model, const FiniteStateController& fsc, const Eigen::VectorXd& x) {
    // Returns (I - beta P) x for the stacked node-major vector x.
    const std::size_t ns = model.num_states();
    const double beta = model.discount();
    Eigen::VectorXd out = x;
    for (std::size_t i = 0; i < fsc.size(); ++i) {
        const auto& n = fsc.node(i);
        for (ObsId z = 0; z < fsc.num_observations(); ++z) {
            const auto next = x.segment(static_cast<Eigen::Index>(n.successors[z] * ns), static_cast<Eigen::Index>(ns));
            out.segment(static_cast<Eigen::Index>(i * ns), static_cast<Eigen::Index>(ns)) -=
                beta * (model.projection(n.action, z) * next);
        }
    }
    return out;
}

}  // namespace

double evaluation_residual(const PomdpModel& model, const FiniteStateController& fsc, const VectorSet& V) {
    if (V.size() != fsc.size()) throw std::invalid_argument("evaluation_residual: size mismatch");
    const std::size_t ns = model.num_states();
    Eigen::VectorXd x(static_cast<Eigen::Index>(fsc.size() * ns)), r(x.size());
    for (std::size_t i = 0; i < fsc.size(); ++i) {
        x.segment(static_cast<Eigen::Index>(i * ns), static_cast<Eigen::Index>(ns)) = V[i].values;
        r.segment(static_cast<Eigen::Index>(i * ns), static_cast<Eigen::Index>(ns)) =
            model.reward_vector(fsc.node(i).action);
    }
    return (apply_system(model, fsc, x) - r).cwiseAbs().maxCoeff();
}

VectorSet evaluate_controller(const PomdpModel& model, const FiniteStateController& fsc) {
    check_compatible(model, fsc);
    const std::size_t ns = model.num_states();
    const std::size_t dim = fsc.size() * ns;
    const double beta = model.discount();

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(dim * (1 + ns * fsc.num_observations()));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < fsc.size(); ++i) {
        const auto& n = fsc.node(i);
        for (StateId s = 0; s < ns; ++s) {
            const auto row = static_cast<int>(i * ns + s);
            entries.emplace_back(row, row, 1.0);
            rhs[row] = model.reward(s, n.action);
            for (ObsId z = 0; z < fsc.num_observations(); ++z) {
                const auto& M = model.projection(n.action, z);
                for (StateId next = 0; next < ns; ++next) {
                    const double coef = M(s, next);
                    if (coef != 0.0)
                        entries.emplace_back(row, static_cast<int>(n.successors[z] * ns + next), -beta * coef);
                }
            }
        }
    }
    Eigen::SparseMatrix<double> K(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    K.setFromTriplets(entries.begin(), entries.end());
    K.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> solver;
    solver.compute(K);
    if (solver.info() != Eigen::Success) throw std::runtime_error("controller evaluation: factorization failed");
    Eigen::VectorXd x = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw std::runtime_error("controller evaluation: solve failed");
    // One step of iterative refinement tightens the residual on larger systems.
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd res = rhs - apply_system(model, fsc, x);
        if (res.cwiseAbs().maxCoeff() <= 1e-12) break;
        x += solver.solve(res);
    }

    VectorSet V;
    V.vectors.reserve(fsc.size());
    for (std::size_t i = 0; i < fsc.size(); ++i) {
        const auto& n = fsc.node(i);
        V.vectors.push_back(
            ValueVector{x.segment(static_cast<Eigen::Index>(i * ns), static_cast<Eigen::Index>(ns)), n.action,
                        n.successors});
    }
    return V;
}

ControllerEditor::ControllerEditor(const FiniteStateController& fsc, const VectorSet& values, Tolerances tol)
    : num_obs_(fsc.num_observations()), tol_(tol), nodes_(fsc.nodes()) {
    if (values.size() != fsc.size()) throw std::invalid_argument("ControllerEditor: one vector per node required");
    for (const auto& v : values.vectors) values_.push_back(v.values);
    redirect_.resize(nodes_.size());
    for (NodeId i = 0; i < nodes_.size(); ++i) redirect_[i] = i;
}

NodeId ControllerEditor::resolve(NodeId node) const {
    if (node >= redirect_.size()) throw std::out_of_range("ControllerEditor: node index out of range");
    while (redirect_[node] != node) node = redirect_[node];
    return node;
}

ControllerEditor::Decision ControllerEditor::integrate(ActionId action, std::vector<NodeId> successors,
                                                       const Eigen::VectorXd& values, const std::string& tag) {
    if (successors.size() != num_obs_) throw std::invalid_argument("integrate: wrong successor count");
    for (auto& next : successors) next = resolve(next);

    std::vector<NodeId> dominated;
    for (NodeId k = 0; k < nodes_.size(); ++k) {
        if (redirect_[k] != k) continue;
        if (nodes_[k].action == action) {
            bool same = true;
            for (std::size_t z = 0; z < num_obs_ && same; ++z) same = resolve(nodes_[k].successors[z]) == successors[z];
            if (same) return {Outcome::Kept, k};
        }
    }
    for (NodeId k = 0; k < nodes_.size(); ++k) {
        if (redirect_[k] != k) continue;
        if (pointwise_dominates(values, values_[k], tol_.equality)) dominated.push_back(k);
    }
    if (!dominated.empty()) {
        const NodeId survivor = dominated.front();
        nodes_[survivor] = ControllerNode{action, std::move(successors), tag};
        values_[survivor] = values;
        for (std::size_t j = 1; j < dominated.size(); ++j) redirect_[dominated[j]] = survivor;
        changed_ = true;
        return {Outcome::Changed, survivor};
    }
    nodes_.push_back(ControllerNode{action, std::move(successors), tag});
    values_.push_back(values);
    redirect_.push_back(nodes_.size() - 1);
    added_ = true;
    return {Outcome::Added, nodes_.size() - 1};
}

ControllerEditor::Finished ControllerEditor::finish() const {
    std::vector<NodeId> compact(nodes_.size(), kNoSuccessor);
    NodeId next = 0;
    for (NodeId k = 0; k < nodes_.size(); ++k)
        if (redirect_[k] == k) compact[k] = next++;
    std::vector<NodeId> index_map(nodes_.size());
    for (NodeId k = 0; k < nodes_.size(); ++k) index_map[k] = compact[resolve(k)];

    std::vector<ControllerNode> out;
    out.reserve(next);
    for (NodeId k = 0; k < nodes_.size(); ++k) {
        if (redirect_[k] != k) continue;
        ControllerNode n = nodes_[k];
        for (auto& s : n.successors) s = index_map[s];
        out.push_back(std::move(n));
    }
    return {FiniteStateController(num_obs_, std::move(out)), std::move(index_map)};
}

ImprovementResult apply_improvement(const FiniteStateController& fsc, const VectorSet& Vdelta, const VectorSet& Vnew,
                                    const Tolerances& tol) {
    ControllerEditor editor(fsc, Vdelta, tol);
    const std::string tag = "dp-g" + std::to_string(Vnew.generation);
    std::vector<NodeId> touched;
    for (const auto& v : Vnew.vectors) {
        for (NodeId next : v.successors)
            if (next >= fsc.size()) throw std::invalid_argument("apply_improvement: annotation references a missing node");
        touched.push_back(editor.integrate(v.action, v.successors, v.values, tag).node);
    }
    auto finished = editor.finish();
    ImprovementResult res{std::move(finished.controller), editor.changed(), editor.added(), {}};
    for (NodeId k : touched) res.vector_nodes.push_back(finished.index_map[k]);
    res.corresponding = res.vector_nodes;
    std::sort(res.corresponding.begin(), res.corresponding.end());
    res.corresponding.erase(std::unique(res.corresponding.begin(), res.corresponding.end()), res.corresponding.end());
    return res;
}

std::pair<FiniteStateController, std::vector<NodeId>> prune_unreachable_mapped(const FiniteStateController& fsc,
                                                                             const std::vector<NodeId>& roots) {
    if (roots.empty()) throw std::invalid_argument("prune_unreachable: no roots");
    std::vector<bool> seen(fsc.size(), false);
    std::deque<NodeId> queue;
    for (NodeId r : roots) {
        if (r >= fsc.size()) throw std::invalid_argument("prune_unreachable: root out of range");
        if (!seen[r]) {
            seen[r] = true;
            queue.push_back(r);
        }
    }
    while (!queue.empty()) {
        const NodeId k = queue.front();
        queue.pop_front();
        for (NodeId next : fsc.node(k).successors)
            if (!seen[next]) {
                seen[next] = true;
                queue.push_back(next);
            }
    }
    std::vector<NodeId> map(fsc.size(), kNoSuccessor);
    NodeId count = 0;
    for (NodeId k = 0; k < fsc.size(); ++k)
        if (seen[k]) map[k] = count++;
    std::vector<ControllerNode> nodes;
    nodes.reserve(count);
    for (NodeId k = 0; k < fsc.size(); ++k) {
        if (!seen[k]) continue;
        ControllerNode n = fsc.node(k);
        for (auto& s : n.successors) s = map[s];
        nodes.push_back(std::move(n));
    }
    return {FiniteStateController(fsc.num_observations(), std::move(nodes)), std::move(map)};
}

FiniteStateController prune_unreachable(const FiniteStateController& fsc, const std::vector<NodeId>& roots) {
    return prune_unreachable_mapped(fsc, roots).first;
}

NodeId start_node(const FiniteStateController& fsc, const VectorSet& V, const Belief& b0) {
    if (V.size() != fsc.size()) throw std::invalid_argument("start_node: one vector per node required");
    return evaluate_at(V, b0).index;
}

Step step_controller(const FiniteStateController& fsc, NodeId node, ObsId z) {
    const auto& n = fsc.node(node);
    return {n.action, n.successors.at(z)};
}

}  // namespace fscpomdp
