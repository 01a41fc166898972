#include "peerlab/zoo.hpp"

namespace peerlab {

AgentKind parse_agent_kind(std::string_view name) {
    if (name == "learner") return AgentKind::Learner;
    if (name == "adversarial") return AgentKind::Adversarial;
    if (name == "novice_frozen") return AgentKind::NoviceFrozen;
    if (name == "expert_frozen") return AgentKind::ExpertFrozen;
    if (name == "oracle_expert") return AgentKind::OracleExpert;
    throw ConfigError("unknown agent kind '" + std::string(name) +
                      "' (learner | adversarial | novice_frozen | expert_frozen | oracle_expert)");
}

std::string_view agent_kind_name(AgentKind kind) {
    switch (kind) {
    case AgentKind::Learner: return "learner";
    case AgentKind::Adversarial: return "adversarial";
    case AgentKind::NoviceFrozen: return "novice_frozen";
    case AgentKind::ExpertFrozen: return "expert_frozen";
    case AgentKind::OracleExpert: return "oracle_expert";
    }
    return "?";
}

ActionValue adversarial_suggest(const RoomState& s) {
    std::size_t best = kUp;
    int best_dist = -1;
    for (std::size_t a : {kUp, kDown, kLeft, kRight}) {
        Cell next = room_move(s.agent, a);
        if (next.x < 0 || next.y < 0 || next.x >= s.size || next.y >= s.size) next = s.agent;
        const int d = manhattan(next, s.goal);
        if (d > best_dist) {
            best_dist = d;
            best = a;
        }
    }
    return ActionValue::discrete(best);
}

ActionValue adversarial_suggest(std::span<const double> room_observation, int room_size) {
    return adversarial_suggest(decode_room_observation(room_observation, room_size));
}

Suggestion EarlyAdvisingPolicy::select(std::span<const Suggestion> suggestions, AgentId self,
                                       Rng& rng) {
    std::vector<std::size_t> others;
    std::size_t own = suggestions.size();
    for (std::size_t k = 0; k < suggestions.size(); ++k) {
        if (suggestions[k].advisor == self)
            own = k;
        else
            others.push_back(k);
    }
    if (own == suggestions.size()) throw ContractViolation("early advising: no self-suggestion");
    if (remaining() == 0 || others.empty()) return suggestions[own];
    ++consumed_;
    return suggestions[others[rng.uniform_index(others.size())]];
}

Suggestion random_advice_select(std::span<const Suggestion> suggestions, Rng& rng) {
    if (suggestions.empty()) throw ContractViolation("random advice: no suggestions");
    // Same draw as peer_select with equal weights.
    const std::vector<double> p(suggestions.size(), 1.0 / static_cast<double>(suggestions.size()));
    return suggestions[sample_index(p, rng)];
}

} // namespace peerlab
