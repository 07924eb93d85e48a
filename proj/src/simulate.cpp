#include "fscpomdp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

namespace fscpomdp {

int truncation_horizon(const PomdpModel& model) {
    const double beta = model.discount();
    const double rmax = model.max_abs_reward();
    const double target = 1e-3 * std::max(1.0, rmax);
    int h = 1;
    double tail = beta * rmax / (1.0 - beta);
    while (!(tail < target)) {
        tail *= beta;
        ++h;
    }
    return h;
}

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Inverse-CDF draw; the last positive entry absorbs rounding.
template <typename Row>
std::size_t sample(const Row& p, std::mt19937_64& rng) {
    const double u = unit_draw(rng);
    double acc = 0.0;
    std::size_t last = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        last = static_cast<std::size_t>(i);
        acc += p[i];
        if (u < acc) return last;
    }
    return last;
}

double run_episode(const PomdpModel& model, const FiniteStateController& fsc, NodeId start, const Belief& b0,
                   int horizon, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    StateId s = sample(b0.probs(), rng);
    NodeId q = start;
    double total = 0.0, discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
        const ActionId a = fsc.node(q).action;
        total += discount * model.reward(s, a);
        discount *= model.discount();
        const StateId next = sample(model.transition_matrix(a).row(s), rng);
        const ObsId z = sample(model.observation_matrix(a).row(next), rng);
        s = next;
        q = fsc.node(q).successors[z];
    }
    return total;
}

}  // namespace

SimulationResult simulate(const PomdpModel& model, const FiniteStateController& fsc, NodeId start, const Belief& b0,
                          std::size_t episodes, int horizon, std::uint64_t seed, unsigned threads) {
    SimulationResult out;
    out.episodes = episodes;
    out.horizon = horizon;
    if (episodes == 0) return out;

    std::vector<double> returns(episodes);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, episodes));
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t e = begin; e < end; ++e)
            returns[e] = run_episode(model, fsc, start, b0, horizon, episode_seed(seed, e));
    };
    if (threads == 1) {
        work(0, episodes);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (episodes + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t begin = w * chunk, end = std::min(episodes, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    double sum = 0.0;
    for (double r : returns) sum += r;
    out.mean = sum / static_cast<double>(episodes);
    if (episodes > 1) {
        double ss = 0.0;
        for (double r : returns) ss += (r - out.mean) * (r - out.mean);
        out.std_error = std::sqrt(ss / static_cast<double>(episodes - 1) / static_cast<double>(episodes));
    }
    return out;
}

}  // namespace fscpomdp
