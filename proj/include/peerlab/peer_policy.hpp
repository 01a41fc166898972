#pragma once

#include "peerlab/core.hpp"
#include "peerlab/learners.hpp"

#include <array>

namespace peerlab {

/// tau_m = tau0 * exp(-lambda * m), one epoch = `epoch_length` env steps.
struct TemperatureSchedule {
    double tau0 = 1.0;
    double lambda = 0.05;
    std::size_t epoch_length = 1000;

    double temperature(std::size_t epoch) const;
    std::size_t epoch_of(std::size_t env_steps) const { return env_steps / epoch_length; }
};

struct Suggestion {
    AgentId advisor = 0;
    ActionValue action;

    friend bool operator==(const Suggestion& a, const Suggestion& b) {
        return a.advisor == b.advisor && a.action == b.action;
    }
};

struct Selection {
    std::size_t index = 0;  // position in the suggestion list
    AgentId advisor = 0;
    std::vector<double> probabilities;
};

/// Boltzmann distribution over weights at temperature tau, computed with the
/// maximum subtracted. Throws ContractViolation on NaN weights or tau <= 0.
std::vector<double> boltzmann_probabilities(std::span<const double> weights, double tau);

/// Samples one suggestion with Boltzmann probabilities. Always consumes one
/// uniform draw. Never blends actions.
Selection peer_select(std::span<const double> weights, std::span<const Suggestion> suggestions,
                      double tau, Rng& rng);

/// Index sampled from `probabilities` with a single uniform draw.
std::size_t sample_index(std::span<const double> probabilities, Rng& rng);

// ---------------------------------------------------------------------------

enum class Mechanism : std::size_t { Critic = 0, Trust = 1, Agent = 2 };
inline constexpr std::size_t kMechanismCount = 3;
std::string_view mechanism_name(Mechanism m);

struct MechanismSet {
    bool critic = false;
    bool trust = false;
    bool agent = false;
    bool advantage = false;

    /// Parses letters from {A, C, T} in any order ("ACT", "ct", ...).
    static MechanismSet parse(std::string_view letters, bool advantage = false);
    static MechanismSet all(bool advantage = true) { return {true, true, true, advantage}; }

    bool enabled(Mechanism m) const;
    std::size_t count() const { return critic + trust + agent; }
    /// Canonical letters in A, C, T order, e.g. "ACT", "CT".
    std::string letters() const;
};

/// Running min/max of every value observed so far; maps into [-1, 1].
class RunningMinMax {
public:
    void observe(double x);
    /// 0 when nothing or only one distinct value has been seen.
    double normalize(double x) const;
    double min() const { return min_; }
    double max() const { return max_; }
    bool empty() const { return !seen_; }

private:
    double min_ = 0.0;
    double max_ = 0.0;
    bool seen_ = false;
};

/// Raw weights for the enabled mechanisms; `raw[m]` is empty when mechanism m is off.
using MechanismWeights = std::array<std::vector<double>, kMechanismCount>;

/// Normalises each enabled mechanism's weights with its running min-max
/// (after observing them) and averages across enabled mechanisms.
std::vector<double> combine_weights(const MechanismWeights& raw,
                                    std::span<RunningMinMax, kMechanismCount> normalizers);

// ---------------------------------------------------------------------------

/// Trust Values (local v[i][j]) and Agent Values (shared v[j]) for a group.
class TrustState {
public:
    TrustState() = default;
    /// Local and global values start uniform on [0, 1).
    TrustState(std::size_t group_size, double alpha, Rng& init_rng);
    /// Explicit initial values: `local` is row-major (advisee, advisor).
    TrustState(std::size_t group_size, double alpha, std::vector<double> local, std::vector<double> global);

    std::size_t size() const { return n_; }
    double alpha() const { return alpha_; }

    double local(AgentId advisee, AgentId advisor) const { return local_[advisee * n_ + advisor]; }
    double global(AgentId advisor) const { return global_[advisor]; }
    /// v <- (1 - alpha) v + alpha * omega
    void update_local(AgentId advisee, AgentId advisor, double omega);
    void update_global(AgentId advisor, double omega);

    std::span<RunningMinMax, kMechanismCount> normalizers(AgentId advisee) {
        return std::span<RunningMinMax, kMechanismCount>(normalizers_[advisee]);
    }

private:
    std::size_t n_ = 0;
    double alpha_ = 0.99;
    std::vector<double> local_;
    std::vector<double> global_;
    std::vector<std::array<RunningMinMax, kMechanismCount>> normalizers_;
};

/// Value target for following advice: r + gamma * Q(s', pi(s')) (zero after a
/// terminal step), minus Q(s, pi(s)) in the advantage variant.
double omega(const Learner& advisee, const Transition& t, double gamma, bool advantage);

// ---------------------------------------------------------------------------

/// FIFO replay buffer of advisor-tagged transitions.
class AdvisorBuffer {
public:
    explicit AdvisorBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return data_.empty(); }

    /// Uniform with replacement. Throws ContractViolation when empty.
    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;
    /// Same draws as sample(), without copying.
    void sample_into(std::size_t batch_size, Rng& rng, std::vector<const Transition*>& out) const;

    /// Contents oldest first.
    std::vector<Transition> contents() const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // next slot to overwrite once full
    std::vector<Transition> data_;
};

} // namespace peerlab
