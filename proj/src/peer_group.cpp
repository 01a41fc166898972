#include "peerlab/peer_group.hpp"

#include <utility>

namespace peerlab {

SelectionRule parse_selection_rule(std::string_view name) {
    if (name == "peer") return SelectionRule::Peer;
    if (name == "random") return SelectionRule::RandomAdvice;
    if (name == "early") return SelectionRule::EarlyAdvising;
    if (name == "solo") return SelectionRule::Solo;
    throw ConfigError("unknown selection rule '" + std::string(name) + "' (peer | random | early | solo)");
}

std::string_view selection_rule_name(SelectionRule rule) {
    switch (rule) {
    case SelectionRule::Peer: return "peer";
    case SelectionRule::RandomAdvice: return "random";
    case SelectionRule::EarlyAdvising: return "early";
    case SelectionRule::Solo: return "solo";
    }
    return "?";
}

PeerGroup::PeerGroup(const Environment& prototype, std::vector<AgentSetup> agents,
                     GroupOptions options, std::uint64_t master_seed)
    : prototype_(prototype.clone()), options_(options) {
    if (agents.empty()) throw ConfigError("peer group needs at least one agent");
    if (options_.batch_size == 0) throw ConfigError("batch size must be positive");
    if (options_.train_every == 0) throw ConfigError("train_every must be positive");
    if (options_.rule == SelectionRule::Peer && options_.mechanisms.count() == 0)
        throw ConfigError("peer selection needs at least one mechanism");
    if (const auto* room = dynamic_cast<const RoomEnv*>(prototype_.get())) room_size_ = room->size();

    const std::size_t n = agents.size();
    for (std::size_t j = 0; j < n; ++j) {
        auto& setup = agents[j];
        const bool needs_learner = setup.kind != AgentKind::Adversarial && setup.kind != AgentKind::OracleExpert;
        if (needs_learner && !setup.learner)
            throw ConfigError("agent " + std::to_string(j) + " (" + std::string(agent_kind_name(setup.kind)) +
                              ") needs a learner");
        if (!needs_learner && room_size_ == 0)
            throw ConfigError(std::string(agent_kind_name(setup.kind)) + " agents require the room environment");
        if (setup.learner && !takes_steps(setup.kind)) setup.learner->freeze();
        Agent a{setup.kind,
                std::move(setup.learner),
                prototype_->clone(),
                AdvisorBuffer(options_.buffer_capacity),
                derive_rng(master_seed, {"agent", j, "env"}),
                derive_rng(master_seed, {"agent", j, "act"}),
                derive_rng(master_seed, {"agent", j, "select"}),
                derive_rng(master_seed, {"agent", j, "buffer"}),
                {},
                0.0,
                {},
                0,
                std::nullopt,
                {}};
        if (options_.rule == SelectionRule::EarlyAdvising) a.early.emplace(options_.early_budget);
        if (takes_steps(a.kind)) a.obs = a.env->reset(a.env_rng);
        agents_.push_back(std::move(a));
    }

    std::vector<double> local(n * n), global(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) local[i * n + j] = derive_rng(master_seed, {"trust", i, j}).uniform();
    for (std::size_t j = 0; j < n; ++j) global[j] = derive_rng(master_seed, {"agent_value", j}).uniform();
    trust_ = TrustState(n, options_.alpha, std::move(local), std::move(global));
    acceptance_.assign(n * n, 0);
}

std::vector<AgentId> PeerGroup::learner_ids() const {
    std::vector<AgentId> ids;
    for (AgentId j = 0; j < size(); ++j)
        if (takes_steps(agents_[j].kind)) ids.push_back(j);
    return ids;
}

ActionValue PeerGroup::advice(AgentId advisor, const Observation& obs) const {
    const Agent& a = agents_[advisor];
    switch (a.kind) {
    case AgentKind::Adversarial: return adversarial_suggest(view(obs), room_size_);
    case AgentKind::OracleExpert: return optimal_action(decode_room_observation(view(obs), room_size_));
    default: return a.learner->greedy_action(obs);
    }
}

std::vector<Suggestion> PeerGroup::collect_suggestions(AgentId, const Observation& obs) const {
    if (obs.size() != env_spec().observation_dim) throw ContractViolation("observation dimension mismatch");
    std::vector<Suggestion> out;
    out.reserve(size());
    for (AgentId j = 0; j < size(); ++j) out.push_back({j, advice(j, obs)});
    return out;
}

double PeerGroup::mechanism_weight(Mechanism m, AgentId advisee, const Observation& obs,
                                   const Suggestion& s) const {
    switch (m) {
    case Mechanism::Critic: return agents_[advisee].learner->q_value(obs, s.action);
    case Mechanism::Trust: return trust_.local(advisee, s.advisor);
    case Mechanism::Agent: return trust_.global(s.advisor);
    }
    return 0.0;
}

void PeerGroup::apply_trust(AgentId advisee, const Transition& t) {
    const auto& mech = options_.mechanisms;
    if (!mech.trust && !mech.agent) return;
    const double w = omega(*agents_[advisee].learner, t, env_spec().gamma, mech.advantage);
    if (mech.trust) trust_.update_local(advisee, t.advisor, w);
    if (mech.agent) trust_.update_global(t.advisor, w);
}

StepRecord PeerGroup::peer_step(AgentId i, std::size_t epoch) {
    Agent& a = agents_[i];
    if (!takes_steps(a.kind)) throw ContractViolation("peer_step on an advisor-only agent");
    if (a.env->done()) throw ContractViolation("peer_step on a finished episode");

    StepRecord rec;
    rec.suggestions = collect_suggestions(i, a.obs);
    rec.suggestions[i].action = a.learner->act(a.obs, ActMode::Explore, a.act_rng);

    const std::size_t n = size();
    switch (options_.rule) {
    case SelectionRule::Peer: {
        MechanismWeights raw;
        for (std::size_t m = 0; m < kMechanismCount; ++m) {
            const auto mech = static_cast<Mechanism>(m);
            if (!options_.mechanisms.enabled(mech)) continue;
            raw[m].reserve(n);
            for (const auto& s : rec.suggestions) raw[m].push_back(mechanism_weight(mech, i, a.obs, s));
        }
        const auto combined = combine_weights(raw, trust_.normalizers(i));
        rec.selection = peer_select(combined, rec.suggestions, options_.temperature.temperature(epoch), a.select_rng);
        break;
    }
    case SelectionRule::RandomAdvice: {
        const auto s = random_advice_select(rec.suggestions, a.select_rng);
        rec.selection = {s.advisor, s.advisor, std::vector<double>(n, 1.0 / static_cast<double>(n))};
        break;
    }
    case SelectionRule::EarlyAdvising: {
        const auto s = a.early->select(rec.suggestions, i, a.select_rng);
        rec.selection = {s.advisor, s.advisor, {}};
        break;
    }
    case SelectionRule::Solo:
        rec.selection = {i, i, {}};
        break;
    }

    const Suggestion& chosen = rec.suggestions[rec.selection.index];
    StepResult r = a.env->step(chosen.action);
    rec.transition = make_transition(a.obs, chosen.action, r.reward, r.observation, r.done && !r.truncated,
                                     chosen.advisor, n);
    a.buffer.push(rec.transition);
    ++acceptance_[i * n + chosen.advisor];
    ++a.steps;

    if (options_.rule == SelectionRule::Peer && !options_.trust_from_replay) apply_trust(i, rec.transition);

    a.learner->advance();
    if (a.buffer.size() >= options_.learning_starts && a.steps % options_.train_every == 0) {
        a.buffer.sample_into(options_.batch_size, a.buffer_rng, a.batch);
        if (options_.rule == SelectionRule::Peer && options_.trust_from_replay)
            for (const Transition* t : a.batch) apply_trust(i, *t);
        a.learner->update(Batch(a.batch));
    }

    a.episode_return += r.reward;
    a.obs = std::move(r.observation);
    if (r.done) {
        rec.episode_ended = true;
        rec.episode_return = a.episode_return;
        a.finished_returns.push_back(a.episode_return);
        a.episode_return = 0.0;
        a.obs = a.env->reset(a.env_rng);
    }
    return rec;
}

void PeerGroup::step_round(const StepObserver& observer) {
    for (AgentId i = 0; i < size(); ++i) {
        if (!takes_steps(agents_[i].kind)) continue;
        StepRecord r = peer_step(i, options_.temperature.epoch_of(agents_[i].steps));
        if (observer) observer(i, r);
    }
}

std::vector<double> PeerGroup::take_episode_returns(AgentId id) {
    return std::exchange(agents_[id].finished_returns, {});
}

} // namespace peerlab
