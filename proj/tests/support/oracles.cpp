#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <functional>
#include <limits>

namespace oracle {

namespace {

Vec random_distribution(std::mt19937_64& rng, std::size_t n, double zero_prob = 0.0) {
    std::exponential_distribution<double> ex(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec p(n);
    double sum = 0.0;
    for (auto& x : p) {
        x = (zero_prob > 0.0 && u(rng) < zero_prob) ? 0.0 : ex(rng);
        sum += x;
    }
    if (sum == 0.0) {
        p[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1.0;
        return p;
    }
    for (auto& x : p) x /= sum;
    return p;
}

}  // namespace

fscpomdp::RawModel random_raw_model(std::mt19937_64& rng, std::size_t S, std::size_t A, std::size_t Z,
                                    double discount) {
    fscpomdp::RawModel raw;
    raw.discount = discount;
    raw.transition.resize(A);
    raw.observation.resize(A);
    for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t s = 0; s < S; ++s) raw.transition[a].push_back(random_distribution(rng, S, 0.3));
        for (std::size_t s = 0; s < S; ++s) raw.observation[a].push_back(random_distribution(rng, Z, 0.2));
    }
    std::uniform_real_distribution<double> r(-1.0, 1.0);
    raw.reward.assign(S, Vec(A));
    for (auto& row : raw.reward)
        for (auto& x : row) x = r(rng);
    return raw;
}

PomdpModel random_model(std::mt19937_64& rng, std::size_t S, std::size_t A, std::size_t Z, double discount) {
    return fscpomdp::validate_model(random_raw_model(rng, S, A, Z, discount));
}

PomdpModel random_observable_model(std::mt19937_64& rng, std::size_t S, std::size_t A, double discount) {
    auto raw = random_raw_model(rng, S, A, S, discount);
    for (auto& per_action : raw.observation)
        for (std::size_t s = 0; s < S; ++s) {
            per_action[s].assign(S, 0.0);
            per_action[s][s] = 1.0;
        }
    return fscpomdp::validate_model(raw);
}

Belief random_belief(std::mt19937_64& rng, std::size_t n) {
    const Vec p = random_distribution(rng, n, 0.1);
    return Belief(Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(n)));
}

VectorSet random_vector_set(std::mt19937_64& rng, std::size_t n, std::size_t count, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    VectorSet V;
    for (std::size_t i = 0; i < count; ++i) {
        fscpomdp::ValueVector v;
        v.values.resize(static_cast<Eigen::Index>(n));
        for (Eigen::Index s = 0; s < v.values.size(); ++s) v.values[s] = u(rng);
        v.action = 0;
        V.vectors.push_back(v);
    }
    return V;
}

FiniteStateController random_controller(std::mt19937_64& rng, std::size_t nodes, std::size_t A, std::size_t Z) {
    std::uniform_int_distribution<std::size_t> pick_a(0, A - 1), pick_n(0, nodes - 1);
    std::vector<fscpomdp::ControllerNode> ns(nodes);
    for (auto& n : ns) {
        n.action = pick_a(rng);
        for (std::size_t z = 0; z < Z; ++z) n.successors.push_back(pick_n(rng));
    }
    return FiniteStateController(Z, std::move(ns));
}

double max_dot(const VectorSet& V, const Vec& b) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : V.vectors) {
        double d = 0.0;
        for (std::size_t s = 0; s < b.size(); ++s) d += b[s] * v.values[static_cast<Eigen::Index>(s)];
        best = std::max(best, d);
    }
    return best;
}

double strategy_backup(const PomdpModel& m, const VectorSet& V, const Vec& b) {
    const std::size_t S = m.num_states(), Z = m.num_observations(), K = V.size();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
        std::vector<std::size_t> sigma(Z, 0);
        for (;;) {
            // Alpha vector of strategy sigma, then its value at b.
            double value = 0.0;
            for (std::size_t s = 0; s < S; ++s) {
                double alpha = m.reward(s, a);
                for (std::size_t z = 0; z < Z; ++z)
                    for (std::size_t s2 = 0; s2 < S; ++s2)
                        alpha += m.discount() * m.transition(s, a, s2) * m.observation(s2, a, z) *
                                 V[sigma[z]].values[static_cast<Eigen::Index>(s2)];
                value += b[s] * alpha;
            }
            best = std::max(best, value);
            std::size_t z = 0;
            while (z < Z && ++sigma[z] == K) sigma[z++] = 0;
            if (z == Z) break;
        }
    }
    return best;
}

double per_observation_backup(const PomdpModel& m, const VectorSet& V, const Vec& b) {
    const std::size_t S = m.num_states(), Z = m.num_observations();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
        double q = 0.0;
        for (std::size_t s = 0; s < S; ++s) q += b[s] * m.reward(s, a);
        for (std::size_t z = 0; z < Z; ++z) {
            Vec joint(S, 0.0);  // Pr(z, s' | b, a)
            for (std::size_t s2 = 0; s2 < S; ++s2) {
                double p = 0.0;
                for (std::size_t s = 0; s < S; ++s) p += b[s] * m.transition(s, a, s2);
                joint[s2] = p * m.observation(s2, a, z);
            }
            q += m.discount() * max_dot(V, joint);
        }
        best = std::max(best, q);
    }
    return best;
}

std::vector<Vec> picard_evaluate(const PomdpModel& m, const FiniteStateController& fsc, double tol) {
    const std::size_t S = m.num_states(), Z = m.num_observations(), N = fsc.size();
    std::vector<Vec> v(N, Vec(S, 0.0)), next = v;
    for (int iter = 0; iter < 1000000; ++iter) {
        double diff = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const auto& node = fsc.node(i);
            for (std::size_t s = 0; s < S; ++s) {
                double x = m.reward(s, node.action);
                for (std::size_t s2 = 0; s2 < S; ++s2) {
                    const double t = m.transition(s, node.action, s2);
                    if (t == 0.0) continue;
                    for (std::size_t z = 0; z < Z; ++z)
                        x += m.discount() * t * m.observation(s2, node.action, z) * v[node.successors[z]][s2];
                }
                diff = std::max(diff, std::abs(x - v[i][s]));
                next[i][s] = x;
            }
        }
        std::swap(v, next);
        if (diff < tol) break;
    }
    return v;
}

Vec mdp_values(const PomdpModel& m, double tol) {
    const std::size_t S = m.num_states();
    Vec v(S, 0.0), next(S);
    for (;;) {
        double diff = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < m.num_actions(); ++a) {
                double q = m.reward(s, a);
                for (std::size_t s2 = 0; s2 < S; ++s2) q += m.discount() * m.transition(s, a, s2) * v[s2];
                best = std::max(best, q);
            }
            next[s] = best;
            diff = std::max(diff, std::abs(best - v[s]));
        }
        std::swap(v, next);
        if (diff < tol) break;
    }
    return v;
}

std::vector<Vec> simplex_grid(std::size_t n, std::size_t res) {
    std::vector<Vec> out;
    std::vector<std::size_t> k(n, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
        if (i + 1 == n) {
            k[i] = left;
            Vec b(n);
            for (std::size_t s = 0; s < n; ++s) b[s] = static_cast<double>(k[s]) / static_cast<double>(res);
            out.push_back(b);
            return;
        }
        for (std::size_t x = 0; x <= left; ++x) {
            k[i] = x;
            rec(i + 1, left - x);
        }
    };
    rec(0, res);
    return out;
}

namespace {

// Gaussian elimination with partial pivoting; false when singular.
bool solve_dense(std::vector<Vec> A, Vec rhs, Vec& x) {
    const std::size_t n = rhs.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
        if (std::abs(A[p][c]) < 1e-12) return false;
        std::swap(A[p], A[c]);
        std::swap(rhs[p], rhs[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = A[r][c] / A[c][c];
            if (f == 0.0) continue;
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            rhs[r] -= f * rhs[c];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i] / A[i][i];
    return true;
}

}  // namespace

double vertex_residual(const VectorSet& V, const VectorSet& U) {
    const std::size_t n = static_cast<std::size_t>(V[0].values.size());
    std::vector<Vec> planes;  // rows h with h . b = 0
    auto add_pairs = [&](const VectorSet& W) {
        for (std::size_t i = 0; i < W.size(); ++i)
            for (std::size_t j = i + 1; j < W.size(); ++j) {
                Vec h(n);
                for (std::size_t s = 0; s < n; ++s)
                    h[s] = W[i].values[static_cast<Eigen::Index>(s)] - W[j].values[static_cast<Eigen::Index>(s)];
                planes.push_back(h);
            }
    };
    add_pairs(V);
    add_pairs(U);
    for (std::size_t s = 0; s < n; ++s) {
        Vec h(n, 0.0);
        h[s] = 1.0;
        planes.push_back(h);
    }

    double best = 0.0;
    auto score = [&](const Vec& b) {
        best = std::max(best, std::abs(max_dot(V, b) - max_dot(U, b)));
    };
    const std::size_t k = n - 1;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    if (k == 0) {
        score(Vec{1.0});
        return best;
    }
    while (true) {
        std::vector<Vec> A;
        Vec rhs;
        for (auto i : idx) {
            A.push_back(planes[i]);
            rhs.push_back(0.0);
        }
        A.push_back(Vec(n, 1.0));
        rhs.push_back(1.0);
        Vec b;
        if (solve_dense(A, rhs, b) && std::all_of(b.begin(), b.end(), [](double x) { return x >= -1e-10; })) {
            for (auto& x : b) x = std::max(0.0, x);
            double sum = 0.0;
            for (double x : b) sum += x;
            for (auto& x : b) x /= sum;
            score(b);
        }
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == planes.size() - k + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return best;
}

std::vector<bool> reachable(const FiniteStateController& fsc, const std::vector<std::size_t>& roots) {
    std::vector<bool> seen(fsc.size(), false);
    std::deque<std::size_t> q;
    for (auto r : roots)
        if (!seen[r]) {
            seen[r] = true;
            q.push_back(r);
        }
    while (!q.empty()) {
        const auto i = q.front();
        q.pop_front();
        for (auto j : fsc.node(i).successors)
            if (!seen[j]) {
                seen[j] = true;
                q.push_back(j);
            }
    }
    return seen;
}

std::string problems_dir() {
    if (const char* p = std::getenv("FSCPOMDP_PROBLEMS")) return p;
    return FSCPOMDP_PROBLEMS_DIR;
}

std::vector<std::string> bundled_problems() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(problems_dir()))
        if (e.path().extension() == ".pomdp") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace oracle
