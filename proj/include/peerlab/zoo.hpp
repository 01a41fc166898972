#pragma once

#include "peerlab/envs.hpp"
#include "peerlab/peer_policy.hpp"

namespace peerlab {

enum class AgentKind { Learner, Adversarial, NoviceFrozen, ExpertFrozen, OracleExpert };

/// Config strings: learner | adversarial | novice_frozen | expert_frozen | oracle_expert.
AgentKind parse_agent_kind(std::string_view name);
std::string_view agent_kind_name(AgentKind kind);
/// Only learners take environment steps; every other kind advises only.
inline bool takes_steps(AgentKind kind) { return kind == AgentKind::Learner; }

/// Poisoning advice: the move that maximises the post-move Manhattan distance
/// to the goal (a blocked move counts as staying). Ties go to the first of
/// up, down, left, right.
ActionValue adversarial_suggest(const RoomState& state);
ActionValue adversarial_suggest(std::span<const double> room_observation, int room_size);

/// Takes a uniformly chosen peer's advice until the budget runs out, then
/// only its own suggestion.
class EarlyAdvisingPolicy {
public:
    explicit EarlyAdvisingPolicy(std::size_t budget) : budget_(budget) {}

    Suggestion select(std::span<const Suggestion> suggestions, AgentId self, Rng& rng);

    std::size_t budget() const { return budget_; }
    std::size_t consumed() const { return consumed_; }
    std::size_t remaining() const { return budget_ - consumed_; }

private:
    std::size_t budget_;
    std::size_t consumed_ = 0;
};

/// Uniform over all suggestions, own one included. Consumes one uniform draw.
Suggestion random_advice_select(std::span<const Suggestion> suggestions, Rng& rng);

} // namespace peerlab
