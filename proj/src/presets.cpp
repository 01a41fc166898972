#include "peerlab/presets.hpp"

namespace peerlab {

namespace {

ExperimentConfig variant(const ExperimentConfig& base, std::string name, std::vector<AgentKind> agents,
                         SelectionRule rule) {
    ExperimentConfig c = base;
    c.name = std::move(name);
    c.agents = std::move(agents);
    c.group.rule = rule;
    return c;
}

std::vector<AgentKind> learners(std::size_t n) { return std::vector<AgentKind>(n, AgentKind::Learner); }

} // namespace

std::vector<ExperimentConfig> peer_vs_single(const ExperimentConfig& base, std::size_t group_size) {
    return {variant(base, "single", learners(1), SelectionRule::Solo),
            variant(base, "peer", learners(group_size), SelectionRule::Peer)};
}

std::vector<ExperimentConfig> ablation(const ExperimentConfig& base, std::size_t group_size) {
    std::vector<ExperimentConfig> out;
    for (bool adv : {true, false})
        for (const char* letters : {"ACT", "AC", "AT", "CT", "C", "A", "T"}) {
            ExperimentConfig c = variant(base, std::string(adv ? "adv_" : "") + letters, learners(group_size),
                                         SelectionRule::Peer);
            c.group.mechanisms = MechanismSet::parse(letters, adv);
            out.push_back(std::move(c));
        }
    out.push_back(variant(base, "RL", learners(1), SelectionRule::Solo));
    out.push_back(variant(base, "Random", learners(group_size), SelectionRule::RandomAdvice));
    return out;
}

std::vector<ExperimentConfig> group_sizes(const ExperimentConfig& base, std::span<const std::size_t> sizes) {
    std::vector<ExperimentConfig> out;
    for (std::size_t n : sizes) {
        if (n == 0) throw ConfigError("group size must be positive");
        out.push_back(variant(base, "n" + std::to_string(n), learners(n), SelectionRule::Peer));
    }
    return out;
}

std::vector<ExperimentConfig> adversary_study(const ExperimentConfig& base, std::size_t n) {
    auto with_adversary = learners(n);
    with_adversary.push_back(AgentKind::Adversarial);
    return {variant(base, "single", learners(1), SelectionRule::Solo),
            variant(base, "peer", learners(n), SelectionRule::Peer),
            variant(base, "peer_adversary", with_adversary, SelectionRule::Peer),
            variant(base, "random", learners(n), SelectionRule::RandomAdvice),
            variant(base, "random_adversary", with_adversary, SelectionRule::RandomAdvice)};
}

ExperimentConfig expert_study(const ExperimentConfig& base, const std::string& expert_checkpoint) {
    const AgentKind expert = expert_checkpoint.empty() ? AgentKind::OracleExpert : AgentKind::ExpertFrozen;
    ExperimentConfig c = variant(base, "expert_study",
                                 {AgentKind::Learner, AgentKind::Learner, expert, AgentKind::NoviceFrozen},
                                 SelectionRule::Peer);
    c.expert_checkpoint = expert_checkpoint;
    return c;
}

} // namespace peerlab
