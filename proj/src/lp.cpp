#include "fscpomdp/lp.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace fscpomdp::lp {

namespace {

// Tableau layout follows the classic dictionary form: rows 0..m-1 are the
// constraints, row m the objective, row m+1 the phase-one objective. Column n
// is the artificial variable, column n+1 the right-hand side.
class Tableau {
public:
    Tableau(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
            const std::vector<double>& c, double eps)
        : m_(static_cast<int>(b.size())),
          n_(static_cast<int>(c.size())),
          eps_(eps),
          nonbasic_(n_ + 1),
          basic_(m_),
          d_(m_ + 2, std::vector<double>(n_ + 2, 0.0)) {
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) d_[i][j] = A[i][j];
            basic_[i] = n_ + i;
            d_[i][n_] = -1.0;
            d_[i][n_ + 1] = b[i];
        }
        for (int j = 0; j < n_; ++j) {
            nonbasic_[j] = j;
            d_[m_][j] = -c[j];
        }
        nonbasic_[n_] = -1;
        d_[m_ + 1][n_] = 1.0;
    }

    Result solve() {
        Result res;
        int r = 0;
        for (int i = 1; i < m_; ++i)
            if (d_[i][n_ + 1] < d_[r][n_ + 1]) r = i;
        if (m_ > 0 && d_[r][n_ + 1] < -eps_) {
            pivot(r, n_);
            const Status phase1 = run(2);
            if (phase1 == Status::IterationLimit) {
                res.status = phase1;
                return res;
            }
            if (phase1 != Status::Optimal || d_[m_ + 1][n_ + 1] < -eps_) {
                res.status = Status::Infeasible;
                return res;
            }
            // Drive the artificial variable out of the basis.
            for (int i = 0; i < m_; ++i) {
                if (basic_[i] != -1) continue;
                int s = 0;
                for (int j = 1; j <= n_; ++j)
                    if (better_entering(d_[i], j, s)) s = j;
                pivot(i, s);
            }
        }
        res.status = run(1);
        res.x.assign(n_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basic_[i] >= 0 && basic_[i] < n_) res.x[basic_[i]] = d_[i][n_ + 1];
        res.objective = res.status == Status::Unbounded ? std::numeric_limits<double>::infinity() : d_[m_][n_ + 1];
        return res;
    }

private:
    bool better_entering(const std::vector<double>& row, int j, int s) const {
        return std::make_pair(row[j], nonbasic_[j]) < std::make_pair(row[s], nonbasic_[s]);
    }

    void pivot(int r, int s) {
        const double inv = 1.0 / d_[r][s];
        for (int i = 0; i < m_ + 2; ++i) {
            if (i == r || std::abs(d_[i][s]) <= eps_) continue;
            const double factor = d_[i][s] * inv;
            for (int j = 0; j < n_ + 2; ++j) d_[i][j] -= d_[r][j] * factor;
            d_[i][s] = d_[r][s] * factor;
        }
        for (int j = 0; j < n_ + 2; ++j)
            if (j != s) d_[r][j] *= inv;
        for (int i = 0; i < m_ + 2; ++i)
            if (i != r) d_[i][s] *= -inv;
        d_[r][s] = inv;
        std::swap(basic_[r], nonbasic_[s]);
    }

    Status run(int phase) {
        const int obj = m_ + phase - 1;
        constexpr int kDegenerateRunBeforeBland = 50;
        constexpr long kMaxPivots = 200000;
        int degenerate_run = 0;
        for (long iter = 0; iter < kMaxPivots; ++iter) {
            const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
            int s = -1;
            for (int j = 0; j <= n_; ++j) {
                if (nonbasic_[j] == -phase) continue;
                if (bland) {
                    if (d_[obj][j] < -eps_ && (s == -1 || nonbasic_[j] < nonbasic_[s])) s = j;
                } else if (s == -1 || better_entering(d_[obj], j, s)) {
                    s = j;
                }
            }
            if (s == -1 || d_[obj][s] >= -eps_) return Status::Optimal;

            int r = -1;
            for (int i = 0; i < m_; ++i) {
                if (d_[i][s] <= eps_) continue;
                if (r == -1) {
                    r = i;
                    continue;
                }
                const double lhs = d_[i][n_ + 1] / d_[i][s];
                const double rhs = d_[r][n_ + 1] / d_[r][s];
                if (lhs < rhs || (lhs == rhs && basic_[i] < basic_[r])) r = i;
            }
            if (r == -1) return Status::Unbounded;
            const bool degenerate = std::abs(d_[r][n_ + 1]) <= eps_;
            degenerate_run = degenerate ? degenerate_run + 1 : 0;
            pivot(r, s);
        }
        return Status::IterationLimit;
    }

    int m_, n_;
    double eps_;
    std::vector<int> nonbasic_, basic_;
    std::vector<std::vector<double>> d_;
};

}  // namespace

Result maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                const std::vector<double>& c, double eps) {
    if (A.size() != b.size()) throw std::invalid_argument("lp::maximize: row count mismatch");
    for (const auto& row : A)
        if (row.size() != c.size()) throw std::invalid_argument("lp::maximize: column count mismatch");
    Tableau t(A, b, c, eps);
    return t.solve();
}

}  // namespace fscpomdp::lp
