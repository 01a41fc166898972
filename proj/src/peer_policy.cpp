#include "peerlab/peer_policy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace peerlab {

double TemperatureSchedule::temperature(std::size_t epoch) const {
    // Floor at the smallest normal double so very long runs never reach tau == 0.
    return std::max(tau0 * std::exp(-lambda * static_cast<double>(epoch)), std::numeric_limits<double>::min());
}

std::vector<double> boltzmann_probabilities(std::span<const double> weights, double tau) {
    if (weights.empty()) throw ContractViolation("peer_select: no weights");
    if (!(tau > 0.0)) throw ContractViolation("peer_select: temperature must be positive");
    double top = -INFINITY;
    for (double w : weights) {
        if (std::isnan(w)) throw ContractViolation("peer_select: NaN weight");
        top = std::max(top, w);
    }
    std::vector<double> p(weights.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        p[k] = std::exp((weights[k] - top) / tau);
        sum += p[k];
    }
    for (auto& x : p) x /= sum;
    return p;
}

std::size_t sample_index(std::span<const double> probabilities, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        acc += probabilities[k];
        if (u < acc) return k;
    }
    // Rounding left u above the final partial sum: take the last non-zero entry.
    for (std::size_t k = probabilities.size(); k-- > 0;)
        if (probabilities[k] > 0.0) return k;
    return probabilities.size() - 1;
}

Selection peer_select(std::span<const double> weights, std::span<const Suggestion> suggestions,
                      double tau, Rng& rng) {
    if (weights.size() != suggestions.size())
        throw ContractViolation("peer_select: weight and suggestion counts differ");
    Selection s;
    s.probabilities = boltzmann_probabilities(weights, tau);
    s.index = sample_index(s.probabilities, rng);
    s.advisor = suggestions[s.index].advisor;
    return s;
}

// ---------------------------------------------------------------------------

std::string_view mechanism_name(Mechanism m) {
    switch (m) {
    case Mechanism::Critic: return "critic";
    case Mechanism::Trust: return "trust";
    case Mechanism::Agent: return "agent";
    }
    return "?";
}

MechanismSet MechanismSet::parse(std::string_view letters, bool advantage) {
    MechanismSet m;
    m.advantage = advantage;
    for (char c : letters) {
        switch (std::toupper(static_cast<unsigned char>(c))) {
        case 'A': m.agent = true; break;
        case 'C': m.critic = true; break;
        case 'T': m.trust = true; break;
        default: throw ConfigError("unknown mechanism letter '" + std::string(1, c) + "' (use A, C, T)");
        }
    }
    if (m.count() == 0) throw ConfigError("at least one mechanism (A, C, T) is required");
    return m;
}

bool MechanismSet::enabled(Mechanism m) const {
    switch (m) {
    case Mechanism::Critic: return critic;
    case Mechanism::Trust: return trust;
    case Mechanism::Agent: return agent;
    }
    return false;
}

std::string MechanismSet::letters() const {
    std::string s;
    if (agent) s += 'A';
    if (critic) s += 'C';
    if (trust) s += 'T';
    return s;
}

void RunningMinMax::observe(double x) {
    if (!std::isfinite(x)) throw ContractViolation("non-finite mechanism weight");
    if (!seen_) {
        min_ = max_ = x;
        seen_ = true;
        return;
    }
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
}

double RunningMinMax::normalize(double x) const {
    if (!seen_ || max_ == min_) return 0.0;
    return std::clamp(2.0 * (x - min_) / (max_ - min_) - 1.0, -1.0, 1.0);
}

std::vector<double> combine_weights(const MechanismWeights& raw,
                                    std::span<RunningMinMax, kMechanismCount> normalizers) {
    std::size_t n = 0, enabled = 0;
    for (const auto& w : raw)
        if (!w.empty()) {
            if (n != 0 && w.size() != n) throw ContractViolation("combine_weights: ragged input");
            n = w.size();
            ++enabled;
        }
    if (enabled == 0) throw ContractViolation("combine_weights: no enabled mechanism");
    std::vector<double> combined(n, 0.0);
    for (std::size_t m = 0; m < kMechanismCount; ++m) {
        if (raw[m].empty()) continue;
        for (double w : raw[m]) normalizers[m].observe(w);
        for (std::size_t j = 0; j < n; ++j) combined[j] += normalizers[m].normalize(raw[m][j]);
    }
    for (auto& c : combined) c /= static_cast<double>(enabled);
    return combined;
}

// ---------------------------------------------------------------------------

TrustState::TrustState(std::size_t group_size, double alpha, Rng& init_rng)
    : n_(group_size), alpha_(alpha), local_(group_size * group_size), global_(group_size),
      normalizers_(group_size) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("trust learning rate alpha must be in [0,1]");
    for (auto& v : local_) v = init_rng.uniform();
    for (auto& v : global_) v = init_rng.uniform();
}

TrustState::TrustState(std::size_t group_size, double alpha, std::vector<double> local,
                       std::vector<double> global)
    : n_(group_size), alpha_(alpha), local_(std::move(local)), global_(std::move(global)),
      normalizers_(group_size) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("trust learning rate alpha must be in [0,1]");
    if (local_.size() != n_ * n_ || global_.size() != n_)
        throw ContractViolation("trust initial values have the wrong shape");
    if (!all_finite(local_) || !all_finite(global_)) throw ContractViolation("non-finite trust value");
}

void TrustState::update_local(AgentId advisee, AgentId advisor, double omega) {
    if (!std::isfinite(omega)) throw ContractViolation("non-finite trust target");
    double& v = local_[advisee * n_ + advisor];
    v = (1.0 - alpha_) * v + alpha_ * omega;
}

void TrustState::update_global(AgentId advisor, double omega) {
    if (!std::isfinite(omega)) throw ContractViolation("non-finite trust target");
    double& v = global_[advisor];
    v = (1.0 - alpha_) * v + alpha_ * omega;
}

double omega(const Learner& advisee, const Transition& t, double gamma, bool advantage) {
    double w = t.reward;
    if (!t.done) w += gamma * advisee.q_value(t.next_state, advisee.greedy_action(t.next_state));
    if (advantage) w -= advisee.q_value(t.state, advisee.greedy_action(t.state));
    return w;
}

// ---------------------------------------------------------------------------

AdvisorBuffer::AdvisorBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("buffer capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void AdvisorBuffer::push(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
        return;
    }
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

void AdvisorBuffer::sample_into(std::size_t batch_size, Rng& rng,
                                std::vector<const Transition*>& out) const {
    if (data_.empty()) throw ContractViolation("sample() from an empty buffer");
    out.clear();
    for (std::size_t b = 0; b < batch_size; ++b) out.push_back(&data_[rng.uniform_index(data_.size())]);
}

std::vector<Transition> AdvisorBuffer::sample(std::size_t batch_size, Rng& rng) const {
    std::vector<const Transition*> ptrs;
    sample_into(batch_size, rng, ptrs);
    std::vector<Transition> out;
    out.reserve(ptrs.size());
    for (const auto* p : ptrs) out.push_back(*p);
    return out;
}

std::vector<Transition> AdvisorBuffer::contents() const {
    std::vector<Transition> out;
    out.reserve(data_.size());
    for (std::size_t k = 0; k < data_.size(); ++k) out.push_back(data_[(head_ + k) % data_.size()]);
    return out;
}

} // namespace peerlab
