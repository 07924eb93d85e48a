#include "fscpomdp/value_function.hpp"

#include "fscpomdp/lp.hpp"

#include <algorithm>
#include <cmath>

namespace fscpomdp {

Evaluation evaluate_at(const VectorSet& V, const Eigen::VectorXd& b) {
    if (V.empty()) throw std::invalid_argument("evaluate_at: empty vector set");
    Evaluation best{V[0].values.dot(b), 0};
    for (std::size_t i = 1; i < V.size(); ++i) {
        const double v = V[i].values.dot(b);
        if (v > best.value) best = {v, i};
    }
    return best;
}

Evaluation evaluate_at(const VectorSet& V, const Belief& b) { return evaluate_at(V, b.probs()); }

bool pointwise_dominates(const Eigen::VectorXd& v, const Eigen::VectorXd& w, double equality) {
    bool strict = false;
    for (Eigen::Index s = 0; s < v.size(); ++s) {
        if (v[s] < w[s]) return false;
        if (v[s] > w[s] + equality) strict = true;
    }
    return strict;
}

bool pointwise_dominates(const ValueVector& v, const ValueVector& w, double equality) {
    return pointwise_dominates(v.values, w.values, equality);
}

GapResult max_min_gap(const Eigen::VectorXd& w, std::span<const Eigen::VectorXd> others) {
    if (others.empty()) throw std::invalid_argument("max_min_gap: empty comparison set");
    const Eigen::Index n = w.size();

    // b(0) is eliminated through sum b = 1; the free gap d is shifted to
    // t = d + K >= 0 so the origin (b = e_0, t = 0) is feasible.
    double K = 1.0;
    for (const auto& u : others) K = std::max(K, (w - u).cwiseAbs().maxCoeff() + 1.0);

    const std::size_t cols = static_cast<std::size_t>(n);  // b(1..n-1), t
    std::vector<std::vector<double>> A;
    std::vector<double> rhs;
    A.reserve(others.size() + 1);
    for (const auto& u : others) {
        const Eigen::VectorXd delta = w - u;
        std::vector<double> row(cols, 0.0);
        for (Eigen::Index s = 1; s < n; ++s) row[s - 1] = -(delta[s] - delta[0]);
        row[cols - 1] = 1.0;
        A.push_back(std::move(row));
        rhs.push_back(K + delta[0]);
    }
    if (n > 1) {
        std::vector<double> row(cols, 1.0);
        row[cols - 1] = 0.0;
        A.push_back(std::move(row));
        rhs.push_back(1.0);
    }
    std::vector<double> c(cols, 0.0);
    c[cols - 1] = 1.0;

    const lp::Result res = lp::maximize(A, rhs, c);
    if (res.status != lp::Status::Optimal) {
        std::vector<Eigen::VectorXd> vecs{w};
        vecs.insert(vecs.end(), others.begin(), others.end());
        throw NumericalError("dominance LP did not reach an optimum", std::move(vecs));
    }

    Eigen::VectorXd b(n);
    double tail = 0.0;
    for (Eigen::Index s = 1; s < n; ++s) {
        b[s] = std::max(0.0, res.x[s - 1]);
        tail += b[s];
    }
    b[0] = std::max(0.0, 1.0 - tail);
    b /= b.sum();

    double gap = std::numeric_limits<double>::infinity();
    for (const auto& u : others) gap = std::min(gap, b.dot(w - u));
    const double lp_gap = res.objective - K;
    return {gap, lp_gap, std::move(b)};
}

bool accepts_witness(const GapResult& r, const Tolerances& tol) {
    return r.lp_gap > tol.dominance && r.gap > 0.5 * tol.dominance;
}

std::optional<Belief> lp_dominance_witness(const ValueVector& w, std::span<const ValueVector> U,
                                           const Tolerances& tol) {
    std::vector<Eigen::VectorXd> others;
    others.reserve(U.size());
    for (const auto& u : U) others.push_back(u.values);
    const GapResult r = max_min_gap(w.values, others);
    if (accepts_witness(r, tol)) return Belief(r.belief);
    return std::nullopt;
}

namespace {

bool nearly_equal(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double eq) {
    return (x - y).cwiseAbs().maxCoeff() <= eq;
}

}  // namespace

VectorSet prune_to_minimal(const VectorSet& V, const Tolerances& tol) {
    if (V.empty()) throw std::invalid_argument("prune_to_minimal: empty vector set");

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < V.size(); ++i) {
        bool duplicate = false;
        for (std::size_t j : candidates)
            if (nearly_equal(V[i].values, V[j].values, tol.equality)) {
                duplicate = true;
                break;
            }
        if (!duplicate) candidates.push_back(i);
    }

    std::vector<std::size_t> frontier;
    for (std::size_t i : candidates) {
        bool dominated = false;
        for (std::size_t j : candidates)
            if (j != i && pointwise_dominates(V[j].values, V[i].values, tol.equality)) {
                dominated = true;
                break;
            }
        if (!dominated) frontier.push_back(i);
    }

    // Witness-driven pruning: every LP runs against the confirmed set only,
    // and a witness promotes the frontier vector that is best at it.
    auto best_at = [&](const Eigen::VectorXd& b) {
        std::size_t best = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < frontier.size(); ++k) {
            const double val = V[frontier[k]].values.dot(b);
            if (val > best_val) {
                best_val = val;
                best = k;
            }
        }
        return best;
    };

    std::vector<std::size_t> kept;
    std::vector<Eigen::VectorXd> kept_values;
    while (!frontier.empty()) {
        std::size_t promote;
        if (kept.empty()) {
            const Eigen::Index n = V[frontier.front()].values.size();
            promote = best_at(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
        } else {
            const GapResult r = max_min_gap(V[frontier.front()].values, kept_values);
            if (!accepts_witness(r, tol)) {
                frontier.erase(frontier.begin());
                continue;
            }
            promote = best_at(r.belief);
        }
        kept.push_back(frontier[promote]);
        kept_values.push_back(V[frontier[promote]].values);
        frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(promote));
    }

    std::sort(kept.begin(), kept.end());
    VectorSet out;
    out.generation = V.generation;
    out.vectors.reserve(kept.size());
    for (std::size_t i : kept) out.vectors.push_back(V[i]);
    return out;
}

Eigen::VectorXd backproject(const PomdpModel& model, ActionId a, ObsId z, const Eigen::VectorXd& v) {
    return model.projection(a, z) * v;
}

std::vector<ValueVector> cross_sum(std::span<const ValueVector> A, std::span<const ValueVector> B) {
    if (A.empty() || B.empty()) throw std::invalid_argument("cross_sum: empty operand");
    std::vector<ValueVector> out;
    out.reserve(A.size() * B.size());
    for (const auto& x : A) {
        for (const auto& y : B) {
            if (x.values.size() != y.values.size() || x.successors.size() != y.successors.size())
                throw std::invalid_argument("cross_sum: dimension mismatch");
            ValueVector sum{x.values + y.values, x.action, x.successors};
            for (std::size_t z = 0; z < y.successors.size(); ++z) {
                if (y.successors[z] == kNoSuccessor) continue;
                if (sum.successors[z] != kNoSuccessor)
                    throw std::logic_error("cross_sum: overlapping observation annotations");
                sum.successors[z] = y.successors[z];
            }
            out.push_back(std::move(sum));
        }
    }
    return out;
}

bool canonical_less(const ValueVector& x, const ValueVector& y) {
    if (x.action != y.action) return x.action < y.action;
    if (x.successors != y.successors) return x.successors < y.successors;
    return std::lexicographical_compare(x.values.begin(), x.values.end(), y.values.begin(), y.values.end());
}

namespace {

VectorSet prune_list(std::vector<ValueVector> vectors, const Tolerances& tol) {
    std::stable_sort(vectors.begin(), vectors.end(), canonical_less);
    VectorSet set;
    set.vectors = std::move(vectors);
    return prune_to_minimal(set, tol);
}

}  // namespace

VectorSet dp_update(const PomdpModel& model, const VectorSet& V, const Tolerances& tol) {
    if (V.empty()) throw std::invalid_argument("dp_update: empty vector set");
    const std::size_t na = model.num_actions();
    const std::size_t nz = model.num_observations();
    const double beta = model.discount();

    std::vector<ValueVector> all;
    for (ActionId a = 0; a < na; ++a) {
        VectorSet acc;
        for (ObsId z = 0; z < nz; ++z) {
            std::vector<ValueVector> projected;
            projected.reserve(V.size());
            for (std::size_t i = 0; i < V.size(); ++i) {
                ValueVector g{beta * backproject(model, a, z, V[i].values), a,
                              std::vector<std::size_t>(nz, kNoSuccessor)};
                g.successors[z] = i;
                projected.push_back(std::move(g));
            }
            VectorSet pruned = prune_list(std::move(projected), tol);
            if (z == 0) {
                acc = std::move(pruned);
            } else {
                acc = prune_list(cross_sum(acc.vectors, pruned.vectors), tol);
            }
        }
        const Eigen::VectorXd r = model.reward_vector(a);
        for (auto& v : acc.vectors) {
            v.values += r;
            all.push_back(std::move(v));
        }
    }

    VectorSet out = prune_list(std::move(all), tol);
    out.generation = V.generation + 1;
    return out;
}

double bellman_residual(const VectorSet& V, const VectorSet& Vprime) {
    if (V.empty() || Vprime.empty()) throw std::invalid_argument("bellman_residual: empty vector set");
    std::vector<Eigen::VectorXd> xs, ys;
    for (const auto& v : V.vectors) xs.push_back(v.values);
    for (const auto& v : Vprime.vectors) ys.push_back(v.values);
    double sup = 0.0;
    for (const auto& y : ys) sup = std::max(sup, max_min_gap(y, xs).gap);
    for (const auto& x : xs) sup = std::max(sup, max_min_gap(x, ys).gap);
    return sup;
}

}  // namespace fscpomdp
