#pragma once

#include "fscpomdp/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fscpomdp {

/// Marks an observation whose successor has not been assigned yet (only
/// appears in partial cross sums).
inline constexpr std::size_t kNoSuccessor = std::numeric_limits<std::size_t>::max();

/// Numerical tolerances shared by the vector-set algorithms.
struct Tolerances {
    /// An LP witness must show a gap above this to keep a vector.
    double dominance = 1e-7;
    /// Componentwise equality and strictness band.
    double equality = 1e-9;
};

/// Surfaced when the simplex fails on a dominance or residual LP.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::vector<Eigen::VectorXd> vectors)
        : std::runtime_error(what), vectors_(std::move(vectors)) {}
    const std::vector<Eigen::VectorXd>& vectors() const { return vectors_; }

private:
    std::vector<Eigen::VectorXd> vectors_;
};

/// One linear facet of a PWLC value function, annotated with the one-step
/// policy choice it stands for: an action and, per observation, the index of
/// the successor facet (or controller node).
struct ValueVector {
    Eigen::VectorXd values;
    ActionId action = 0;
    std::vector<std::size_t> successors;
};

/// V(b) = max_i b . v_i. generation counts DP updates (or evaluations) that
/// produced the set.
struct VectorSet {
    std::vector<ValueVector> vectors;
    int generation = 0;

    std::size_t size() const { return vectors.size(); }
    bool empty() const { return vectors.empty(); }
    const ValueVector& operator[](std::size_t i) const { return vectors[i]; }
};

struct Evaluation {
    double value;
    std::size_t index;
};

/// max_i b . v_i; ties go to the lowest index.
Evaluation evaluate_at(const VectorSet& V, const Belief& b);
Evaluation evaluate_at(const VectorSet& V, const Eigen::VectorXd& b);

/// v >= w everywhere and v > w + equality somewhere.
bool pointwise_dominates(const Eigen::VectorXd& v, const Eigen::VectorXd& w, double equality = 1e-9);
bool pointwise_dominates(const ValueVector& v, const ValueVector& w, double equality = 1e-9);

/// Optimum of  max_b min_u b.(w - u)  over the simplex, with the belief that
/// attains it. gap is recomputed at the returned belief; lp_gap is the
/// solver's optimum.
struct GapResult {
    double gap;
    double lp_gap;
    Eigen::VectorXd belief;
};

/// LP optimum above the dominance tolerance and recomputed gap above half of it.
bool accepts_witness(const GapResult& r, const Tolerances& tol);
GapResult max_min_gap(const Eigen::VectorXd& w, std::span<const Eigen::VectorXd> others);

/// A belief where w beats every vector in U by more than the dominance
/// tolerance, or nothing if w is dominated by U over the simplex.
std::optional<Belief> lp_dominance_witness(const ValueVector& w, std::span<const ValueVector> U,
                                           const Tolerances& tol = {});

/// Minimal subset with the same upper surface. Duplicates collapse to their
/// lowest-index copy; the retained vectors keep their relative order.
VectorSet prune_to_minimal(const VectorSet& V, const Tolerances& tol = {});

/// g(s) = sum_s' Pr(z|s',a) Pr(s'|s,a) v(s').
Eigen::VectorXd backproject(const PomdpModel& model, ActionId a, ObsId z, const Eigen::VectorXd& v);

/// {x + y}, merging successor annotations. Keys assigned in both operands are
/// an invariant violation (std::logic_error).
std::vector<ValueVector> cross_sum(std::span<const ValueVector> A, std::span<const ValueVector> B);

/// Exact one-step backup by incremental pruning. Output vectors carry the
/// action and the per-observation index into V they were built from, and are
/// sorted canonically by (action, successors, values).
VectorSet dp_update(const PomdpModel& model, const VectorSet& V, const Tolerances& tol = {});

/// sup_b |V'(b) - V(b)|, solved exactly with one LP per facet in each direction.
double bellman_residual(const VectorSet& V, const VectorSet& Vprime);

/// Lexicographic order on (action, successors, values).
bool canonical_less(const ValueVector& x, const ValueVector& y);

}  // namespace fscpomdp
