#include "doctest.h"
#include "peerlab/peer_group.hpp"

using namespace peerlab;

namespace {

std::unique_ptr<Learner> zero_table(int size, double lr = 0.5) {
    return std::make_unique<TabularQ>(StateGrid{4, size, 0.0, 1.0}, 4, lr, 0.9);
}

std::vector<AgentSetup> learners(int n, int size) {
    std::vector<AgentSetup> out;
    for (int j = 0; j < n; ++j) out.push_back({AgentKind::Learner, zero_table(size)});
    return out;
}

} // namespace

TEST_CASE("adversarial suggestions: examples") {
    CHECK(adversarial_suggest({5, {2, 2}, {4, 0}}).index() == kUp);
    CHECK(adversarial_suggest({5, {2, 2}, {2, 4}}).index() == kDown);
}

TEST_CASE("adversarial suggestion never approaches the goal") {
    for (int n : {3, 5, 11}) {
        RoomEnv env(n);
        for (Cell goal : env.border_cells())
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y) {
                    if (Cell{x, y} == goal) continue;
                    env.set_state({x, y}, goal);
                    const int before = manhattan({x, y}, goal);
                    bool can_increase = false;
                    for (std::size_t a = 0; a < 4; ++a) {
                        Cell c = room_move({x, y}, a);
                        if (c.x >= 0 && c.y >= 0 && c.x < n && c.y < n && manhattan(c, goal) > before)
                            can_increase = true;
                    }
                    auto r = env.step(adversarial_suggest(env.state()));
                    CHECK(r.reward == 0.0);
                    if (can_increase) CHECK(manhattan(env.agent(), goal) == before + 1);
                    else CHECK(manhattan(env.agent(), goal) == before);
                    CHECK(adversarial_suggest(view(env.observe()), n) == adversarial_suggest(env.state()));
                }
    }
}

TEST_CASE("early advising spends its budget on other agents only") {
    std::vector<Suggestion> s;
    for (std::size_t j = 0; j < 4; ++j) s.push_back({j, ActionValue::discrete(j)});
    Rng rng = derive_rng(20, {"early"});

    EarlyAdvisingPolicy none(0);
    for (int k = 0; k < 10; ++k) CHECK(none.select(s, 2, rng).advisor == 2);

    EarlyAdvisingPolicy one(1);
    CHECK(one.select(s, 2, rng).advisor != 2);
    CHECK(one.select(s, 2, rng).advisor == 2);
    CHECK(one.consumed() == 1);

    EarlyAdvisingPolicy many(9000);
    std::vector<int> counts(4, 0);
    for (int k = 0; k < 12000; ++k) ++counts[many.select(s, 0, rng).advisor];
    CHECK(counts[0] == 3000);
    CHECK(many.remaining() == 0);
    for (int j = 1; j < 4; ++j) CHECK(std::abs(counts[j] - 3000) < 5 * std::sqrt(9000 * (1.0 / 3) * (2.0 / 3)));
}

TEST_CASE("random advice is uniform and matches equal-weight peer selection") {
    std::vector<Suggestion> one{{0, ActionValue::discrete(3)}};
    Rng rng = derive_rng(21, {"random"});
    for (int k = 0; k < 10; ++k) CHECK(random_advice_select(one, rng).advisor == 0);

    std::vector<Suggestion> s;
    for (std::size_t j = 0; j < 4; ++j) s.push_back({j, ActionValue::discrete(j)});
    std::vector<int> counts(4, 0);
    const int draws = 10000;
    for (int k = 0; k < draws; ++k) ++counts[random_advice_select(s, rng).advisor];
    for (int c : counts) CHECK(std::abs(c - 2500) < 5 * std::sqrt(draws * 0.25 * 0.75));

    Rng a = derive_rng(22, {"eq"}), b = derive_rng(22, {"eq"});
    const std::vector<double> equal(4, 0.37);
    for (int k = 0; k < 500; ++k)
        CHECK(random_advice_select(s, a).advisor == peer_select(equal, s, 0.8, b).advisor);
}

TEST_CASE("agent kinds parse") {
    CHECK(parse_agent_kind("oracle_expert") == AgentKind::OracleExpert);
    CHECK(agent_kind_name(AgentKind::NoviceFrozen) == "novice_frozen");
    CHECK_THROWS_AS(parse_agent_kind("wizard"), ConfigError);
    CHECK(parse_selection_rule("random") == SelectionRule::RandomAdvice);
    CHECK_THROWS_AS(parse_selection_rule("vote"), ConfigError);
}

TEST_CASE("suggestions come from every agent in id order") {
    std::vector<AgentSetup> agents = learners(2, 5);
    agents.push_back({AgentKind::Adversarial, nullptr});
    agents.push_back({AgentKind::OracleExpert, nullptr});
    PeerGroup g(RoomEnv(5), std::move(agents), {}, 1);
    RoomEnv env(5);
    env.set_state({2, 2}, {4, 0});
    const auto s = g.collect_suggestions(0, env.observe());
    REQUIRE(s.size() == 4);
    for (AgentId j = 0; j < 4; ++j) CHECK(s[j].advisor == j);
    CHECK(s[0].action.index() == 0);
    CHECK(s[2].action == adversarial_suggest(env.state()));
    CHECK(s[3].action == optimal_action(env.state()));
    CHECK(s == g.collect_suggestions(1, env.observe()));
    CHECK_FALSE(g.learner(0)->trainable() == false);
    CHECK(g.learner_ids() == std::vector<AgentId>{0, 1});
}

TEST_CASE("single-agent group gives a single self suggestion") {
    PeerGroup g(RoomEnv(5), learners(1, 5), {}, 1);
    const auto s = g.collect_suggestions(0, g.current_observation(0));
    REQUIRE(s.size() == 1);
    CHECK(s[0].advisor == 0);
}

TEST_CASE("critic-only group with fresh tables selects uniformly") {
    GroupOptions opt;
    opt.mechanisms = MechanismSet::parse("C");
    opt.learning_starts = 1000000;  // keep the tables at zero
    PeerGroup g(RoomEnv(5), learners(4, 5), opt, 3);
    for (int k = 0; k < 20; ++k) {
        StepRecord r = g.peer_step(0, 0);
        REQUIRE(r.selection.probabilities.size() == 4);
        for (double p : r.selection.probabilities) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
    }
}

TEST_CASE("mechanism weights read trust state") {
    PeerGroup g(RoomEnv(5), learners(3, 5), {}, 4);
    const auto& obs = g.current_observation(0);
    const auto s = g.collect_suggestions(0, obs);
    for (AgentId j = 0; j < 3; ++j) {
        CHECK(g.mechanism_weight(Mechanism::Critic, 0, obs, s[j]) == 0.0);
        CHECK(g.mechanism_weight(Mechanism::Trust, 0, obs, s[j]) == g.trust().local(0, j));
        const double w = g.mechanism_weight(Mechanism::Agent, 0, obs, s[j]);
        CHECK(w >= 0.0);
        CHECK(w < 1.0);
        CHECK(w == g.mechanism_weight(Mechanism::Agent, 2, obs, s[j]));
    }
}

TEST_CASE("agent values stay shared after every update") {
    GroupOptions opt;
    opt.mechanisms = MechanismSet::parse("A", true);
    PeerGroup g(RoomEnv(5), learners(3, 5), opt, 5);
    for (int round = 0; round < 300; ++round) {
        g.step_round();
        const auto& obs0 = g.current_observation(0);
        const auto s = g.collect_suggestions(0, obs0);
        for (AgentId j = 0; j < 3; ++j) {
            const double w0 = g.mechanism_weight(Mechanism::Agent, 0, obs0, s[j]);
            for (AgentId i = 1; i < 3; ++i)
                CHECK(g.mechanism_weight(Mechanism::Agent, i, g.current_observation(i), s[j]) == w0);
        }
    }
}

TEST_CASE("executed actions and buffer tags match the chosen suggestion") {
    std::vector<AgentSetup> agents = learners(3, 7);
    agents.push_back({AgentKind::Adversarial, nullptr});
    PeerGroup g(RoomEnv(7), std::move(agents), {}, 6);
    std::vector<std::size_t> decisions(4, 0);
    for (int k = 0; k < 2000; ++k) {
        const AgentId i = k % 3;
        StepRecord r = g.peer_step(i, k / 3000);
        CHECK(r.transition.advisor == r.selection.advisor);
        CHECK(r.transition.action == r.suggestions[r.selection.index].action);
        ++decisions[i];
    }
    for (AgentId i = 0; i < 3; ++i) {
        std::size_t row = 0;
        for (AgentId j = 0; j < 4; ++j) row += g.acceptance(i, j);
        CHECK(row == decisions[i]);
        CHECK(g.decisions(i) == decisions[i]);
        for (const auto& t : g.buffer(i).contents()) CHECK(t.advisor < 4);
    }
    CHECK_THROWS_AS(g.peer_step(3, 0), ContractViolation);
}

TEST_CASE("frozen members keep their parameters") {
    std::vector<AgentSetup> agents = learners(2, 5);
    auto novice = std::make_unique<TabularQ>(StateGrid{4, 5, 0.0, 1.0}, 4, 0.5, 0.9);
    Rng init = derive_rng(7, {"novice"});
    novice->randomize(0.0, 1.0, init);
    const auto sum = novice->checksum();
    agents.push_back({AgentKind::NoviceFrozen, std::move(novice)});
    PeerGroup g(RoomEnv(5), std::move(agents), {}, 7);
    CHECK_FALSE(g.learner(2)->trainable());
    for (int k = 0; k < 500; ++k) g.step_round();
    CHECK(g.learner(2)->checksum() == sum);
    CHECK(g.env_steps(2) == 0);
}

TEST_CASE("single-agent peer group equals a plain off-policy loop") {
    const std::uint64_t seed = 8;
    GroupOptions opt;
    opt.batch_size = 8;
    PeerGroup g(RoomEnv(5), learners(1, 5), opt, seed);

    // The reference loop draws from the same per-role streams.
    TabularQ ref(StateGrid{4, 5, 0.0, 1.0}, 4, 0.5, 0.9);
    RoomEnv env(5);
    Rng env_rng = derive_rng(seed, {"agent", 0, "env"});
    Rng act_rng = derive_rng(seed, {"agent", 0, "act"});
    Rng buf_rng = derive_rng(seed, {"agent", 0, "buffer"});
    AdvisorBuffer buffer(opt.buffer_capacity);
    std::vector<const Transition*> batch;
    Observation obs = env.reset(env_rng);

    for (int k = 0; k < 3000; ++k) {
        StepRecord r = g.peer_step(0, k / 1000);
        const ActionValue a = ref.act(obs, ActMode::Explore, act_rng);
        StepResult s = env.step(a);
        Transition t = make_transition(obs, a, s.reward, s.observation, s.done && !s.truncated, 0, 1);
        buffer.push(t);
        ref.advance();
        buffer.sample_into(opt.batch_size, buf_rng, batch);
        ref.update(Batch(batch));
        obs = s.done ? env.reset(env_rng) : s.observation;

        REQUIRE(r.transition.action == a);
        REQUIRE(r.transition.reward == t.reward);
    }
    CHECK(g.learner(0)->checksum() == ref.checksum());
}
