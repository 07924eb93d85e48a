#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fscpomdp::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Result {
    Status status = Status::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

/// Dense two-phase tableau simplex.
///
///   maximize c.x  subject to  A x <= b,  x >= 0
///
/// A is row-major with rows.size() == b.size() and every row of length
/// c.size(). Negative entries of b trigger a phase-one solve. Pivoting uses
/// Dantzig's rule and falls back to Bland's rule after a run of degenerate
/// pivots, so the method always terminates.
Result maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                const std::vector<double>& c, double eps = 1e-10);

}  // namespace fscpomdp::lp
