#include "fscpomdp/policy_iteration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>

namespace fscpomdp {

std::string_view to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::EpsilonOptimal: return "epsilon-optimal";
        case SolveStatus::IterationLimit: return "iteration-limit";
        case SolveStatus::NodeLimit: return "node-limit";
        case SolveStatus::MemoryLimit: return "memory-limit";
    }
    return "unknown";
}

void SolverConfig::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
    if (max_nodes == 0) throw std::invalid_argument("max_nodes must be positive");
    if (!(tolerances.dominance > 0.0) || !(tolerances.equality > 0.0))
        throw std::invalid_argument("tolerances must be positive");
}

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<unsigned> first_primes(std::size_t count) {
    std::vector<unsigned> primes;
    for (unsigned n = 2; primes.size() < count; ++n) {
        bool prime = true;
        for (unsigned p : primes) {
            if (p * p > n) break;
            if (n % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) primes.push_back(n);
    }
    return primes;
}

double radical_inverse(std::uint64_t index, unsigned base) {
    double inv = 1.0 / base, f = inv, x = 0.0;
    while (index > 0) {
        x += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return x;
}

}  // namespace

std::vector<Belief> probe_beliefs(std::size_t num_states, std::size_t count, std::string_view key) {
    std::vector<Belief> out;
    out.reserve(count);
    if (num_states == 1) {
        for (std::size_t i = 0; i < count; ++i) out.push_back(Belief::uniform(1));
        return out;
    }
    // Halton points in the unit cube of dimension n-1; the spacings of the
    // sorted coordinates are uniformly distributed on the simplex.
    const auto primes = first_primes(num_states - 1);
    const std::uint64_t offset = 1 + fnv1a(key) % 4096;
    std::vector<double> cuts(num_states + 1);
    for (std::size_t i = 0; i < count; ++i) {
        cuts.front() = 0.0;
        cuts.back() = 1.0;
        for (std::size_t d = 0; d + 1 < num_states; ++d) cuts[d + 1] = radical_inverse(offset + i, primes[d]);
        std::sort(cuts.begin() + 1, cuts.end() - 1);
        Eigen::VectorXd p(static_cast<Eigen::Index>(num_states));
        for (std::size_t s = 0; s < num_states; ++s) p[static_cast<Eigen::Index>(s)] = cuts[s + 1] - cuts[s];
        out.emplace_back(p / p.sum());
    }
    return out;
}

FiniteStateController initial_controller(const PomdpModel& model) {
    ActionId best = 0;
    double best_min = -std::numeric_limits<double>::infinity();
    for (ActionId a = 0; a < model.num_actions(); ++a) {
        const double worst = model.reward_matrix().col(a).minCoeff();
        if (worst > best_min) {
            best_min = worst;
            best = a;
        }
    }
    return FiniteStateController::single_node(model.num_observations(), best);
}

double residual_threshold(double epsilon, double discount) { return epsilon * (1.0 - discount) / discount; }

PolicyIterationResult policy_iterate(const PomdpModel& model, const FiniteStateController& fsc0,
                                     const SolverConfig& cfg, std::string_view probe_key) {
    using Clock = std::chrono::steady_clock;
    cfg.validate();
    const double threshold = residual_threshold(cfg.epsilon, model.discount());
    const auto probes = probe_beliefs(model.num_states(), 200, probe_key);

    FiniteStateController fsc = fsc0;
    VectorSet V = evaluate_controller(model, fsc);
    IterationStats stats;

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        const auto t0 = Clock::now();
        VectorSet Vnew = dp_update(model, V, cfg.tolerances);
        const double residual = bellman_residual(V, Vnew);

        IterationRecord rec;
        rec.iteration = iter;
        rec.controller_nodes = fsc.size();
        rec.dp_vectors = Vnew.size();
        rec.residual = residual;
        rec.probe_values.reserve(probes.size());
        for (const auto& b : probes) rec.probe_values.push_back(evaluate_at(V, b).value);
        double total = 0.0;
        for (double v : rec.probe_values) total += v;
        rec.probe_value = total / static_cast<double>(rec.probe_values.size());

        auto finish_record = [&] {
            rec.elapsed_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            stats.records.push_back(rec);
        };

        if (residual <= threshold) {
            finish_record();
            return {std::move(fsc), std::move(V), std::move(stats), SolveStatus::EpsilonOptimal};
        }

        ImprovementResult imp = apply_improvement(fsc, V, Vnew, cfg.tolerances);
        if (!imp.changed && !imp.added) {
            // Every vector is a structural duplicate: Bellman fixed point.
            finish_record();
            return {std::move(fsc), std::move(V), std::move(stats), SolveStatus::EpsilonOptimal};
        }

        auto [pruned, map] = prune_unreachable_mapped(imp.controller, imp.corresponding);
        const bool removed_any = pruned.size() < imp.controller.size();
        if (!imp.changed && !removed_any) {
            // Pure additions: old nodes keep their vectors, new nodes take the
            // DP vectors they were built from.
            VectorSet next;
            next.generation = Vnew.generation;
            next.vectors.resize(pruned.size());
            for (NodeId k = 0; k < fsc.size(); ++k) next.vectors[map[k]] = V.vectors[k];
            for (std::size_t j = 0; j < Vnew.size(); ++j) {
                const NodeId k = map[imp.vector_nodes[j]];
                if (k >= fsc.size()) next.vectors[k] = Vnew.vectors[j];
            }
            for (NodeId k = 0; k < pruned.size(); ++k) {
                next.vectors[k].action = pruned.node(k).action;
                next.vectors[k].successors = pruned.node(k).successors;
            }
            V = std::move(next);
        } else {
            V = evaluate_controller(model, pruned);
            V.generation = Vnew.generation;
        }
        fsc = std::move(pruned);
        finish_record();

        if (fsc.size() > cfg.max_nodes)
            return {std::move(fsc), std::move(V), std::move(stats), SolveStatus::NodeLimit};
    }
    return {std::move(fsc), std::move(V), std::move(stats), SolveStatus::IterationLimit};
}

}  // namespace fscpomdp
