#pragma once

#include <boost/container/small_vector.hpp>
#include <cmath>
#include <cstddef>
#include <concepts>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace peerlab {

using AgentId = std::size_t;
/// Small real vectors (observations, continuous actions) live inline so a
/// replay buffer of transitions stays contiguous in memory.
using RealVec = boost::container::small_vector<double, 4>;
using Observation = RealVec;

/// Thrown when a caller breaks an operation's precondition (stepping a done
/// env, updating a frozen learner, NaN weights...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Thrown for invalid user-facing configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::span<const double> view(const RealVec& v) { return {v.data(), v.size()}; }

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}
inline bool all_finite(const RealVec& xs) { return all_finite(view(xs)); }

/// Either a discrete action index or a continuous action vector.
class ActionValue {
public:
    ActionValue() : value_(std::size_t{0}) {}

    static ActionValue discrete(std::size_t index) { return ActionValue(index); }
    static ActionValue continuous(RealVec values);

    bool is_discrete() const { return std::holds_alternative<std::size_t>(value_); }
    std::size_t index() const;
    const RealVec& values() const;

    /// Bitwise equality for continuous vectors, index equality for discrete.
    friend bool operator==(const ActionValue& a, const ActionValue& b);

private:
    explicit ActionValue(std::size_t index) : value_(index) {}
    explicit ActionValue(RealVec values) : value_(std::move(values)) {}

    std::variant<std::size_t, RealVec> value_;
};

/// Replay tuple extended with the id of the advisor whose suggestion was executed.
struct Transition {
    Observation state;
    ActionValue action;
    double reward = 0.0;
    Observation next_state;
    bool done = false;
    AgentId advisor = 0;
};

/// Builds a transition, rejecting non-finite data and out-of-range advisors.
Transition make_transition(Observation state, ActionValue action, double reward,
                           Observation next_state, bool done, AgentId advisor,
                           std::size_t group_size);

// ---------------------------------------------------------------------------
// Deterministic random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. Distributions are implemented here rather than with <random>'s
// distribution classes, whose algorithms are implementation-defined.

/// One element of a stream derivation path: a label or an integer index.
class PathPart {
public:
    PathPart(const char* label) : label_(label), is_label_(true) {}
    PathPart(std::string_view label) : label_(label), is_label_(true) {}
    PathPart(const std::string& label) : label_(label), is_label_(true) {}
    template <std::integral T>
    PathPart(T index) : index_(static_cast<std::uint64_t>(index)) {}

    bool is_label() const { return is_label_; }
    std::string_view label() const { return label_; }
    std::uint64_t index() const { return index_; }

private:
    std::string_view label_;
    std::uint64_t index_ = 0;
    bool is_label_ = false;
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [0, n). Unbiased (rejection sampling).
    std::size_t uniform_index(std::size_t n);
    /// Standard normal (Marsaglia polar method).
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Master seed plus a derivation path, e.g. {"run", 3, "agent", 0, "env"}.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::vector<std::string> path;
};

/// Seed for the stream identified by (master, path). Pure function.
std::uint64_t derive_seed(std::uint64_t master, std::span<const PathPart> path);

/// Stream identified by (master, path). Path must be non-empty.
Rng derive_rng(std::uint64_t master, std::initializer_list<PathPart> path);
Rng derive_rng(std::uint64_t master, std::span<const PathPart> path);
Rng derive_rng(const SeedSpec& spec);

} // namespace peerlab
