#pragma once

#include "peerlab/envs.hpp"
#include "peerlab/learners.hpp"
#include "peerlab/peer_policy.hpp"
#include "peerlab/zoo.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace peerlab {

/// How an advisee picks among the suggestions it receives.
enum class SelectionRule {
    Peer,           // Boltzmann over mechanism weights
    RandomAdvice,   // uniform over all suggestions
    EarlyAdvising,  // uniform over peers until the advice budget is spent
    Solo,           // own suggestion only (plain off-policy loop)
};

SelectionRule parse_selection_rule(std::string_view name);
std::string_view selection_rule_name(SelectionRule rule);

struct GroupOptions {
    SelectionRule rule = SelectionRule::Peer;
    MechanismSet mechanisms = MechanismSet::all(true);
    TemperatureSchedule temperature;
    double alpha = 0.99;
    std::size_t buffer_capacity = 50000;
    std::size_t batch_size = 64;
    std::size_t learning_starts = 1;
    std::size_t train_every = 1;
    std::size_t early_budget = 10000;
    /// Update trust from replayed advisor-tagged samples instead of the online transition.
    bool trust_from_replay = false;
};

struct AgentSetup {
    AgentKind kind = AgentKind::Learner;
    std::unique_ptr<Learner> learner;  // null for adversarial and oracle_expert
};

struct StepRecord {
    Transition transition;
    Selection selection;
    std::vector<Suggestion> suggestions;
    bool episode_ended = false;
    double episode_return = 0.0;  // valid when episode_ended
};

/// n agents, each with its own environment copy, buffer and random streams.
/// Advances round-robin on the calling thread; advice queries only read
/// other agents' learners.
class PeerGroup {
public:
    PeerGroup(const Environment& prototype, std::vector<AgentSetup> agents, GroupOptions options,
              std::uint64_t master_seed);

    std::size_t size() const { return agents_.size(); }
    const GroupOptions& options() const { return options_; }
    const EnvSpec& env_spec() const { return prototype_->spec(); }

    /// One suggestion per agent (advisee included), ordered by advisor id,
    /// each the advisor's deterministic advice for `obs`.
    std::vector<Suggestion> collect_suggestions(AgentId advisee, const Observation& obs) const;

    /// Raw (unnormalised) weight of one mechanism for one suggestion.
    double mechanism_weight(Mechanism m, AgentId advisee, const Observation& obs,
                            const Suggestion& suggestion) const;

    /// One decision and environment step for learner `advisee`.
    StepRecord peer_step(AgentId advisee, std::size_t epoch);
    using StepObserver = std::function<void(AgentId, const StepRecord&)>;
    /// One peer_step for every learner, in agent-id order; epoch from each agent's step count.
    void step_round(const StepObserver& observer = {});

    AgentKind kind(AgentId id) const { return agents_[id].kind; }
    const Learner* learner(AgentId id) const { return agents_[id].learner.get(); }
    Learner* mutable_learner(AgentId id) { return agents_[id].learner.get(); }
    std::vector<AgentId> learner_ids() const;
    std::size_t env_steps(AgentId id) const { return agents_[id].steps; }
    const Observation& current_observation(AgentId id) const { return agents_[id].obs; }
    const AdvisorBuffer& buffer(AgentId id) const { return agents_[id].buffer; }

    const TrustState& trust() const { return trust_; }
    std::size_t acceptance(AgentId advisee, AgentId advisor) const {
        return acceptance_[advisee * size() + advisor];
    }
    std::size_t decisions(AgentId advisee) const { return agents_[advisee].steps; }
    std::optional<EarlyAdvisingPolicy> early_policy(AgentId id) const { return agents_[id].early; }

    /// Returns of episodes finished since the last call, then clears them.
    std::vector<double> take_episode_returns(AgentId id);

private:
    struct Agent {
        AgentKind kind;
        std::unique_ptr<Learner> learner;
        std::unique_ptr<Environment> env;
        AdvisorBuffer buffer;
        Rng env_rng, act_rng, select_rng, buffer_rng;
        Observation obs;
        double episode_return = 0.0;
        std::vector<double> finished_returns;
        std::size_t steps = 0;
        std::optional<EarlyAdvisingPolicy> early;
        std::vector<const Transition*> batch;
    };

    ActionValue advice(AgentId advisor, const Observation& obs) const;
    void apply_trust(AgentId advisee, const Transition& t);

    std::unique_ptr<Environment> prototype_;
    GroupOptions options_;
    int room_size_ = 0;  // 0 when the environment is not a Room
    std::vector<Agent> agents_;
    TrustState trust_;
    std::vector<std::size_t> acceptance_;
};

} // namespace peerlab
