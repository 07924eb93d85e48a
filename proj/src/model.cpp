#include "fscpomdp/model.hpp"

#include <cmath>
#include <sstream>

namespace fscpomdp {

namespace {

std::vector<std::string> names_or_indices(const std::vector<std::string>& names, std::size_t n) {
    if (!names.empty()) return names;
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
    return out;
}

// Validates one probability row and renormalizes it in place.
void check_row(std::vector<double>& row, const std::string& where) {
    double sum = 0.0;
    for (double p : row) {
        if (!std::isfinite(p)) throw ModelError("non-finite probability in " + where);
        if (p < 0.0) throw ModelError("negative probability in " + where);
        if (p > 1.0 + kRenormalizationBand) throw ModelError("probability above 1 in " + where);
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRenormalizationBand) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "stochasticity violation: " << where << " sums to " << sum;
        throw ModelError(msg.str());
    }
    for (double& p : row) p /= sum;
}

}  // namespace

PomdpModel validate_model(const RawModel& raw) {
    const std::size_t na = raw.transition.size();
    if (na == 0) throw ModelError("dimension mismatch: no actions");
    if (raw.observation.size() != na) throw ModelError("dimension mismatch: observation table has wrong action count");
    const std::size_t ns = raw.transition[0].size();
    if (ns == 0) throw ModelError("dimension mismatch: no states");
    if (raw.observation[0].empty() || raw.observation[0][0].empty())
        throw ModelError("dimension mismatch: no observations");
    const std::size_t nz = raw.observation[0][0].size();
    if (raw.reward.size() != ns) throw ModelError("dimension mismatch: reward table has wrong state count");
    for (const auto& row : raw.reward)
        if (row.size() != na) throw ModelError("dimension mismatch: reward table has wrong action count");
    if (!raw.state_names.empty() && raw.state_names.size() != ns) throw ModelError("dimension mismatch: state names");
    if (!raw.action_names.empty() && raw.action_names.size() != na) throw ModelError("dimension mismatch: action names");
    if (!raw.observation_names.empty() && raw.observation_names.size() != nz)
        throw ModelError("dimension mismatch: observation names");
    if (!(raw.discount > 0.0 && raw.discount < 1.0)) throw ModelError("discount must lie strictly inside (0,1)");

    PomdpModel m;
    m.num_obs_ = nz;
    m.discount_ = raw.discount;
    m.reward_.resize(ns, na);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a) {
            if (!std::isfinite(raw.reward[s][a])) throw ModelError("non-finite reward");
            m.reward_(s, a) = raw.reward[s][a];
        }

    for (std::size_t a = 0; a < na; ++a) {
        if (raw.transition[a].size() != ns) throw ModelError("dimension mismatch: transition rows");
        if (raw.observation[a].size() != ns) throw ModelError("dimension mismatch: observation rows");
        Eigen::MatrixXd t(ns, ns), o(ns, nz);
        for (std::size_t s = 0; s < ns; ++s) {
            auto row = raw.transition[a][s];
            if (row.size() != ns) throw ModelError("dimension mismatch: transition columns");
            check_row(row, "T(a=" + std::to_string(a) + ", s=" + std::to_string(s) + ")");
            for (std::size_t j = 0; j < ns; ++j) t(s, j) = row[j];

            auto orow = raw.observation[a][s];
            if (orow.size() != nz) throw ModelError("dimension mismatch: observation columns");
            check_row(orow, "O(a=" + std::to_string(a) + ", s'=" + std::to_string(s) + ")");
            for (std::size_t z = 0; z < nz; ++z) o(s, z) = orow[z];
        }
        m.transition_.push_back(std::move(t));
        m.observation_.push_back(std::move(o));
    }

    m.projection_.reserve(na * nz);
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t z = 0; z < nz; ++z)
            m.projection_.push_back(m.transition_[a] * m.observation_[a].col(z).asDiagonal());

    m.state_names_ = names_or_indices(raw.state_names, ns);
    m.action_names_ = names_or_indices(raw.action_names, na);
    m.observation_names_ = names_or_indices(raw.observation_names, nz);
    return m;
}

Belief::Belief(Eigen::VectorXd probs) : probs_(std::move(probs)) {
    if (probs_.size() == 0) throw ModelError("empty belief");
    for (Eigen::Index i = 0; i < probs_.size(); ++i) {
        if (!std::isfinite(probs_[i]) || probs_[i] < -1e-12) throw ModelError("belief has a negative entry");
        if (probs_[i] < 0.0) probs_[i] = 0.0;
    }
    const double sum = probs_.sum();
    if (std::abs(sum - 1.0) > 1e-9) throw ModelError("belief does not sum to 1");
    probs_ /= sum;
}

Belief Belief::uniform(std::size_t num_states) {
    return Belief(Eigen::VectorXd::Constant(num_states, 1.0 / static_cast<double>(num_states)));
}

Belief Belief::unit(std::size_t num_states, StateId s) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(num_states);
    p[s] = 1.0;
    return Belief(std::move(p));
}

Eigen::VectorXd belief_numerator(const PomdpModel& model, const Belief& b, ActionId a, ObsId z) {
    Eigen::VectorXd predicted = model.transition_matrix(a).transpose() * b.probs();
    return predicted.cwiseProduct(model.observation_matrix(a).col(z));
}

Eigen::VectorXd observation_probability(const PomdpModel& model, const Belief& b, ActionId a) {
    Eigen::VectorXd predicted = model.transition_matrix(a).transpose() * b.probs();
    return model.observation_matrix(a).transpose() * predicted;
}

Belief belief_update(const PomdpModel& model, const Belief& b, ActionId a, ObsId z) {
    Eigen::VectorXd num = belief_numerator(model, b, a, z);
    const double pz = num.sum();
    if (!(pz > 0.0)) {
        throw ImpossibleObservation("impossible observation " + model.observation_names()[z] + " after action " +
                                    model.action_names()[a]);
    }
    return Belief(num / pz);
}

double expected_reward(const PomdpModel& model, const Belief& b, ActionId a) {
    return b.probs().dot(model.reward_matrix().col(a));
}

}  // namespace fscpomdp
