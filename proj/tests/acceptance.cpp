// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers to run a subset.
#include "peerlab/harness.hpp"
#include "peerlab/presets.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

using namespace peerlab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
    std::vector<std::uint64_t> s(n);
    std::iota(s.begin(), s.end(), 1);
    return s;
}

ExperimentConfig room11(std::size_t steps, std::size_t seeds) {
    ExperimentConfig c;
    c.env.size = 11;
    c.total_steps = steps;
    c.eval_interval = steps / 50;
    c.eval_episodes = 20;
    c.seeds = seed_range(seeds);
    return c;
}

std::vector<double> scores(std::span<const RunResult> runs, double tail = 0.0) {
    std::vector<double> s;
    for (const auto& r : runs) s.push_back(tail > 0.0 ? run_score_tail(r, tail) : run_score(r));
    return s;
}

double mean_score(std::span<const RunResult> runs, double tail = 0.0) {
    const auto s = scores(runs, tail);
    return summarize(s).mean;
}

std::size_t index_of(std::span<const ExperimentConfig> configs, const std::string& name) {
    for (std::size_t k = 0; k < configs.size(); ++k)
        if (configs[k].name == name) return k;
    throw std::logic_error("no config named " + name);
}

// First acceptance snapshot at or after `fraction` of training.
std::size_t snapshot_at(const RunResult& r, double fraction, std::size_t total_steps) {
    for (std::size_t k = 0; k < r.acceptance.size(); ++k)
        if (static_cast<double>(r.acceptance[k].step) >= fraction * static_cast<double>(total_steps)) return k;
    return r.acceptance.size() - 1;
}

// ---------------------------------------------------------------------------

Verdict peer_vs_single() {
    const auto configs = peer_vs_single(room11(200000, 10), 4);
    const auto runs = run_configs(configs);
    const auto single = summarize(scores(runs[0]));
    const auto peer = summarize(scores(runs[1]));
    const bool ok = peer.mean - peer.sem > single.mean + single.sem;
    return {ok, fmt("peer %.4f+-%.4f vs single %.4f+-%.4f (mean+-sem, %zu seeds)", peer.mean, peer.sem,
                    single.mean, single.sem, peer.n)};
}

Verdict poisoning() {
    const auto configs = adversary_study(room11(200000, 5), 3);
    const auto runs = run_configs(configs);
    const auto tail = [&](const char* name) { return mean_score(runs[index_of(configs, name)], 0.75); };
    const auto auc = [&](const char* name) { return mean_score(runs[index_of(configs, name)]); };

    const double peer = tail("peer"), attacked = tail("peer_adversary"), single = tail("single");
    const double random = auc("random"), random_attacked = auc("random_adversary");
    const bool close = std::abs(attacked - peer) <= 0.1 * peer;
    const bool above = attacked > single;
    const double drop = 1.0 - random_attacked / random;
    const bool degrades = drop >= 0.2;
    return {close && above && degrades,
            fmt("final quarter: attacked %.4f vs clean %.4f (within 10%%: %s), vs single %.4f (strictly above: "
                "%s); random advice AUC drop %.1f%% (>=20%%: %s); AUC attacked %.4f single %.4f",
                attacked, peer, close ? "yes" : "no", single, above ? "yes" : "no", 100 * drop,
                degrades ? "yes" : "no", auc("peer_adversary"), auc("single"))};
}

Verdict expert_identification() {
    auto base = room11(200000, 5);
    const auto config = expert_study(base);
    const std::vector<ExperimentConfig> configs{config};
    const auto runs = run_configs(configs)[0];
    const AgentId expert = 2, novice = 3;

    std::size_t early_ok = 0, early_total = 0, crossovers = 0;
    for (const auto& r : runs) {
        const std::size_t n = r.group_size();
        const std::size_t q = snapshot_at(r, 0.25, config.total_steps);
        const std::size_t w0 = snapshot_at(r, 0.9, config.total_steps) - 1, w1 = r.acceptance.size() - 1;
        bool crossed = false;
        for (AgentId i : {AgentId{0}, AgentId{1}}) {
            bool novice_min = true, expert_max = true;
            for (AgentId j = 0; j < n; ++j) {
                if (j != novice && r.count(q, i, novice) >= r.count(q, i, j)) novice_min = false;
                if (j != expert && r.count(q, i, expert) <= r.count(q, i, j)) expert_max = false;
            }
            early_ok += novice_min && expert_max;
            ++early_total;
            const AgentId other = 1 - i;
            const auto window = [&](AgentId j) { return r.count(w1, i, j) - r.count(w0, i, j); };
            if (window(expert) < window(other)) crossed = true;
        }
        crossovers += crossed;
    }
    const bool ok = early_ok == early_total && crossovers == runs.size();
    return {ok, fmt("at 25%%: novice min and expert max for %zu/%zu learners; final-window crossover in %zu/%zu "
                    "runs",
                    early_ok, early_total, crossovers, runs.size())};
}

Verdict ablation_check() {
    const auto configs = ablation(room11(100000, 5), 4);
    const auto runs = run_configs(configs);
    const double single = mean_score(runs[index_of(configs, "RL")]);

    std::string beaten;
    bool singles_ok = true;
    for (const char* name : {"A", "C", "T", "adv_A", "adv_C", "adv_T"}) {
        const double s = mean_score(runs[index_of(configs, name)]);
        singles_ok = singles_ok && s > single;
        beaten += fmt(" %s=%.4f", name, s);
    }
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& c : configs)
        if (c.group.rule == SelectionRule::Peer)
            ranked.emplace_back(mean_score(runs[index_of(configs, c.name)]), c.name);
    std::sort(ranked.rbegin(), ranked.rend());
    std::size_t rank = 0;
    while (ranked[rank].second != "adv_ACT") ++rank;
    const bool top3 = rank < 3;
    return {singles_ok && top3,
            fmt("RL=%.4f%s; adv_ACT=%.4f ranks %zu of %zu (leader %s=%.4f)", single, beaten.c_str(),
                ranked[rank].first, rank + 1, ranked.size(), ranked[0].second.c_str(), ranked[0].first)};
}

Verdict group_size_check() {
    const std::size_t sizes[] = {2, 4, 6, 10};
    const auto configs = group_sizes(room11(100000, 10), sizes);
    const auto runs = run_configs(configs);
    std::vector<double> means;
    std::string detail;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        means.push_back(mean_score(runs[k]));
        detail += fmt("%sn=%zu %.4f", k ? ", " : "", sizes[k], means.back());
    }
    const bool ok = means[0] <= *std::min_element(means.begin() + 1, means.end());
    return {ok, detail};
}

int bfs_distance(int n, Cell from, Cell to) {
    std::vector<int> dist(n * n, -1);
    std::deque<Cell> queue{from};
    dist[from.y * n + from.x] = 0;
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        if (c == to) return dist[c.y * n + c.x];
        const int dx[] = {0, 0, -1, 1}, dy[] = {1, -1, 0, 0};
        for (int k = 0; k < 4; ++k) {
            const Cell d{c.x + dx[k], c.y + dy[k]};
            if (d.x < 0 || d.y < 0 || d.x >= n || d.y >= n || dist[d.y * n + d.x] >= 0) continue;
            dist[d.y * n + d.x] = dist[c.y * n + c.x] + 1;
            queue.push_back(d);
        }
    }
    return -1;
}

Verdict oracle_equivalence() {
    const auto started = std::chrono::steady_clock::now();
    const fs::path dir = fs::temp_directory_path() / "peerlab_accept_oracle";
    fs::remove_all(dir);
    ExperimentConfig c;
    c.name = "room5";
    c.env.size = 5;
    c.group.rule = SelectionRule::Solo;
    c.total_steps = 50000;
    c.eval_interval = 10000;
    c.output_dir = dir.string();
    c.save_checkpoints = true;
    run_experiment(c, 1);

    auto env = make_environment(c.env);
    auto learner = make_learner(c, AgentKind::Learner, env->spec(), 1, 0);
    std::ifstream in(dir / "runs" / "room5" / "seed_1" / "agent_0.ckpt");
    learner->load(in);
    fs::remove_all(dir);

    RoomEnv room(5);
    std::size_t matched = 0;
    const auto goals = room.border_cells();
    for (Cell goal : goals) {
        room.set_state(room.center(), goal);
        Observation obs = room.observe();
        int steps = 0;
        while (!room.done()) {
            obs = room.step(learner->greedy_action(obs)).observation;
            ++steps;
        }
        matched += room.agent() == goal && steps == bfs_distance(5, room.center(), goal);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {matched == goals.size() && secs < 60.0,
            fmt("%zu/%zu goals on a shortest path, %.1fs", matched, goals.size(), secs)};
}

Verdict numerical_properties() {
    Rng rng = derive_rng(2024, {"acceptance", "weights"});
    double worst_sum = 0, worst_shift = 0;
    std::size_t argmax_ok = 0;
    const std::size_t trials = 1000;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<double> v(2 + rng.uniform_index(9));
        for (double& x : v) x = rng.uniform(-5, 5);
        const double tau = std::exp(rng.uniform(-3, 2));
        const auto p = boltzmann_probabilities(v, tau);
        worst_sum = std::max(worst_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
        auto shifted = v;
        const double c = rng.uniform(-100, 100);
        for (double& x : shifted) x += c;
        const auto q = boltzmann_probabilities(shifted, tau);
        for (std::size_t j = 0; j < v.size(); ++j) worst_shift = std::max(worst_shift, std::abs(p[j] - q[j]));
        const std::size_t best = std::max_element(v.begin(), v.end()) - v.begin();
        argmax_ok += boltzmann_probabilities(v, 1e-9)[best] > 1.0 - 1e-12;
    }

    double worst_trust = 0;
    for (double alpha : {0.99, 0.5, 0.1}) {
        const double v0 = 0.8, target = -0.3;
        TrustState s(1, alpha, {v0}, {v0});
        for (int k = 1; k <= 100; ++k) {
            s.update_local(0, 0, target);
            worst_trust = std::max(worst_trust, std::abs(std::abs(s.local(0, 0) - target) -
                                                         std::pow(1 - alpha, k) * std::abs(v0 - target)));
        }
    }

    Rng init = derive_rng(2024, {"acceptance", "init"});
    NetworkConfig cfg;
    cfg.hidden = 8;
    NeuralQ net(4, 3, 0.9, cfg, init);
    Rng data = derive_rng(2024, {"acceptance", "data"});
    std::vector<Transition> samples;
    for (int k = 0; k < 8; ++k) {
        Observation s(4), s2(4);
        for (double& x : s) x = data.uniform(-1, 1);
        for (double& x : s2) x = data.uniform(-1, 1);
        samples.push_back(make_transition(s, ActionValue::discrete(data.uniform_index(3)), data.uniform(-1, 1), s2,
                                          k % 3 == 0, 0, 1));
    }
    auto p = net.parameters();
    for (double& x : p) x += data.uniform(-0.3, 0.3);
    net.set_parameters(p);
    std::vector<const Transition*> ptrs;
    for (auto& t : samples) ptrs.push_back(&t);
    const Batch batch(ptrs);
    const auto grad = net.loss_and_gradient(batch).second;
    double num2 = 0, diff2 = 0;
    const double h = 1e-6;
    for (std::size_t k = 0; k < p.size(); ++k) {
        auto q = p;
        q[k] = p[k] + h;
        net.set_parameters(q);
        const double up = net.loss(batch);
        q[k] = p[k] - h;
        net.set_parameters(q);
        const double fd = (up - net.loss(batch)) / (2 * h);
        num2 += fd * fd;
        diff2 += (fd - grad[k]) * (fd - grad[k]);
    }
    const double rel = std::sqrt(diff2 / num2);

    const bool ok = worst_sum <= 1e-12 && worst_shift <= 1e-12 && argmax_ok == trials && worst_trust <= 1e-10 &&
                    rel < 1e-4;
    return {ok, fmt("sum err %.1e, shift err %.1e, argmax %zu/%zu, trust err %.1e, gradient rel err %.1e",
                    worst_sum, worst_shift, argmax_ok, trials, worst_trust, rel)};
}

ExperimentConfig point_goal_config(std::size_t steps, std::size_t seeds) {
    ExperimentConfig c;
    c.env.type = "point_goal";
    c.env.gamma = 0.99;
    c.learner.type = "actor_critic";
    c.learner.learning_rate = 1e-3;
    c.learner.network.hidden = 32;
    c.group.batch_size = 32;
    c.total_steps = steps;
    c.eval_interval = steps / 20;
    c.eval_episodes = 10;
    c.seeds = seed_range(seeds);
    return c;
}

Verdict continuous_mechanisms() {
    const auto configs = peer_vs_single(point_goal_config(100000, 5), 4);
    std::size_t steps = 0, off_menu = 0, non_finite = 0;
    const auto observer = [&](AgentId, const StepRecord& rec) {
        ++steps;
        const auto& a = rec.transition.action;
        if (std::none_of(rec.suggestions.begin(), rec.suggestions.end(),
                         [&](const Suggestion& s) { return s.action == a; }))
            ++off_menu;
        const bool finite = std::isfinite(rec.transition.reward) && all_finite(rec.transition.next_state) &&
                            (a.is_discrete() || all_finite(a.values()));
        non_finite += !finite;
    };

    std::vector<double> single, peer;
    for (std::uint64_t seed : configs[0].seeds) {
        single.push_back(run_score(run_experiment(configs[0], seed)));
        const auto r = run_experiment(configs[1], seed, observer);
        peer.push_back(run_score(r));
        for (const auto& curve : r.curves)
            for (const auto& p : curve) non_finite += !std::isfinite(p.solo_return) || !std::isfinite(p.train_return);
    }
    const double s = summarize(single).mean, p = summarize(peer).mean;
    const bool ok = off_menu == 0 && non_finite == 0 && p >= s;
    return {ok, fmt("%zu peer steps, %zu actions off the suggestion list, %zu non-finite values; peer %.4f vs "
                    "single %.4f over %zu seeds",
                    steps, off_menu, non_finite, p, s, peer.size())};
}

std::map<std::string, std::string> slurp_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = ss.str();
    }
    return files;
}

Verdict determinism() {
    ExperimentConfig room = room11(20000, 2);
    room.name = "room_peer";
    room.agents = {AgentKind::Learner, AgentKind::Learner, AgentKind::Learner, AgentKind::Adversarial};
    ExperimentConfig cont = point_goal_config(2000, 2);
    cont.name = "point_goal_peer";
    cont.agents.assign(3, AgentKind::Learner);
    const std::vector<ExperimentConfig> base{room, cont};

    std::vector<std::map<std::string, std::string>> trees;
    for (int rep = 0; rep < 2; ++rep) {
        const fs::path dir = fs::temp_directory_path() / ("peerlab_accept_det_" + std::to_string(rep));
        fs::remove_all(dir);
        // One output tree per environment: summaries only compare like with like.
        for (auto c : base) {
            c.output_dir = (dir / c.name).string();
            const std::vector<ExperimentConfig> one{c};
            write_outputs(c.output_dir, one, run_configs(one));
        }
        trees.push_back(slurp_tree(dir));
        fs::remove_all(dir);
    }
    std::size_t differing = 0;
    for (const auto& [name, bytes] : trees[0]) {
        const auto it = trees[1].find(name);
        differing += it == trees[1].end() || it->second != bytes;
    }
    const bool ok = !trees[0].empty() && trees[0].size() == trees[1].size() && differing == 0;
    return {ok, fmt("%zu files compared, %zu differ", trees[0].size(), differing)};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, Verdict (*)()>> criteria{
        {"peer group beats single agent", peer_vs_single},
        {"robust to an adversarial advisor", poisoning},
        {"expert identified, then overtaken", expert_identification},
        {"mechanism ablation", ablation_check},
        {"group size", group_size_check},
        {"single agent matches BFS oracle on room 5", oracle_equivalence},
        {"numerical properties", numerical_properties},
        {"continuous-action peers", continuous_mechanisms},
        {"byte-identical reruns", determinism},
    };
    std::set<int> only;
    for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!only.empty() && !only.count(id)) continue;
        const auto started = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        failed += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[k].first
                  << "): " << v.detail << " [" << fmt("%.0fs", secs) << "]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
