#include "peerlab/harness.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace peerlab {

namespace fs = std::filesystem;

double evaluate_alone(const Policy& policy, const Environment& prototype, std::size_t episodes, Rng& rng) {
    if (episodes == 0) throw ContractViolation("evaluate_alone needs at least one episode");
    double total = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) {
        auto env = prototype.clone();
        Observation obs = env->reset(rng);
        while (!env->done()) {
            StepResult r = env->step(policy(obs));
            total += r.reward;
            obs = std::move(r.observation);
        }
    }
    return total / static_cast<double>(episodes);
}

double evaluate_alone(const Learner& learner, const Environment& prototype, std::size_t episodes, Rng& rng) {
    return evaluate_alone([&](const Observation& o) { return learner.greedy_action(o); }, prototype, episodes,
                          rng);
}

std::unique_ptr<Learner> make_learner(const ExperimentConfig& config, AgentKind kind, const EnvSpec& spec,
                                      std::uint64_t seed, AgentId id) {
    if (kind == AgentKind::Adversarial || kind == AgentKind::OracleExpert) return nullptr;
    const auto& lc = config.learner;
    Rng init = derive_rng(seed, {"agent", id, "init"});
    NetworkConfig net = lc.network;
    net.learning_rate = lc.learning_rate;

    std::unique_ptr<Learner> learner;
    if (lc.type == "tabular") {
        if (config.env.type != "room") throw ConfigError("tabular learner requires the room environment");
        auto q = std::make_unique<TabularQ>(StateGrid{spec.observation_dim, config.env.size, 0.0, 1.0},
                                            spec.actions.count, lc.learning_rate, spec.gamma);
        if (kind == AgentKind::NoviceFrozen)
            q->randomize(lc.novice_init_low, lc.novice_init_high, init);
        else if (lc.init_scale > 0.0)
            q->randomize(0.0, lc.init_scale, init);
        learner = std::move(q);
    } else if (lc.type == "neural_q") {
        learner = std::make_unique<NeuralQ>(spec.observation_dim, spec.actions.count, spec.gamma, net, init);
    } else if (lc.type == "actor_critic") {
        learner = std::make_unique<ActorCriticLite>(spec.observation_dim, spec.actions, spec.gamma, net, init);
    } else {
        throw ConfigError("unknown learner type '" + lc.type + "'");
    }

    if (kind == AgentKind::ExpertFrozen) {
        std::ifstream in(config.expert_checkpoint);
        if (!in) throw ConfigError("cannot open expert checkpoint '" + config.expert_checkpoint + "'");
        learner->load(in);
    }
    learner->set_epsilon_schedule(
        {lc.epsilon_start, lc.epsilon_end,
         static_cast<std::size_t>(lc.epsilon_fraction * static_cast<double>(config.total_steps))});
    if (!takes_steps(kind)) learner->freeze();
    return learner;
}

namespace {

std::string run_dir(const ExperimentConfig& c, std::uint64_t seed) {
    return (fs::path(c.output_dir) / "runs" / c.name / ("seed_" + std::to_string(seed))).string();
}

std::ofstream open_csv(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

} // namespace

RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const PeerGroup::StepObserver& observer) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    const auto env = make_environment(config.env);

    std::vector<AgentSetup> setups;
    for (AgentId j = 0; j < config.agents.size(); ++j)
        setups.push_back({config.agents[j], make_learner(config, config.agents[j], env->spec(), seed, j)});
    PeerGroup group(*env, std::move(setups), config.group, seed);
    const auto learners = group.learner_ids();
    const std::size_t n = group.size();

    RunResult result;
    result.run_id = config.name;
    result.seed = seed;
    result.kinds = config.agents;
    result.curves.resize(n);
    std::vector<double> last_train(n, 0.0);

    const MechanismSet trust_mechanisms =
        config.group.rule == SelectionRule::Peer ? config.group.mechanisms : MechanismSet{};
    std::ofstream curves_out, accept_out, trust_out;
    const bool persist = !config.output_dir.empty();
    if (persist) {
        const fs::path dir = run_dir(config, seed);
        fs::create_directories(dir);
        curves_out = open_csv(dir / "curves.csv");
        accept_out = open_csv(dir / "acceptance.csv");
        trust_out = open_csv(dir / "trust.csv");
        write_curves_csv(curves_out, {}, true);
        write_acceptance_csv(accept_out, {}, true);
        write_trust_csv(trust_out, {}, {}, true);
    }

    std::size_t checkpoint = 0;
    for (std::size_t step = 1; step <= config.total_steps; ++step) {
        group.step_round(observer);
        if (step % config.eval_interval != 0 && step != config.total_steps) continue;

        ++checkpoint;
        for (AgentId i : learners) {
            // Same evaluation goals for every agent at a given checkpoint.
            Rng eval_rng = derive_rng(seed, {"eval", checkpoint});
            const double solo = evaluate_alone(*group.learner(i), *env, config.eval_episodes, eval_rng);
            const auto finished = group.take_episode_returns(i);
            if (!finished.empty())
                last_train[i] = std::accumulate(finished.begin(), finished.end(), 0.0) /
                                static_cast<double>(finished.size());
            result.curves[i].push_back({step, solo, last_train[i]});
        }
        AcceptanceSnapshot acc{step, std::vector<std::size_t>(n * n)};
        TrustSnapshot tr{step, std::vector<double>(n * n), std::vector<double>(n)};
        for (AgentId i = 0; i < n; ++i) {
            tr.global[i] = group.trust().global(i);
            for (AgentId j = 0; j < n; ++j) {
                acc.counts[i * n + j] = group.acceptance(i, j);
                tr.local[i * n + j] = group.trust().local(i, j);
            }
        }
        result.acceptance.push_back(std::move(acc));
        result.trust.push_back(std::move(tr));

        if (persist) {
            // Only the newest checkpoint, so files grow as the run progresses.
            RunResult latest;
            latest.run_id = result.run_id;
            latest.seed = seed;
            latest.kinds = result.kinds;
            latest.curves.resize(n);
            for (AgentId i : learners) latest.curves[i].push_back(result.curves[i].back());
            latest.acceptance.push_back(result.acceptance.back());
            latest.trust.push_back(result.trust.back());
            const RunResult one[] = {std::move(latest)};
            write_curves_csv(curves_out, one, false);
            write_acceptance_csv(accept_out, one, false);
            write_trust_csv(trust_out, one, trust_mechanisms, false);
            curves_out.flush();
            accept_out.flush();
            trust_out.flush();
        }
    }

    for (AgentId i = 0; i < n; ++i) result.decisions.push_back(group.decisions(i));

    if (persist && config.save_checkpoints) {
        for (AgentId j = 0; j < n; ++j) {
            if (!group.learner(j)) continue;
            std::ofstream out(fs::path(run_dir(config, seed)) / ("agent_" + std::to_string(j) + ".ckpt"));
            if (!out) throw std::runtime_error("cannot write checkpoint for agent " + std::to_string(j));
            group.learner(j)->save(out);
        }
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

// ---------------------------------------------------------------------------

double average_reward_over_time(std::span<const double> returns) {
    if (returns.empty()) throw ContractViolation("average_reward_over_time: empty curve");
    return std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
}

double average_reward_over_time(std::span<const CurvePoint> curve) {
    std::vector<double> r;
    r.reserve(curve.size());
    for (const auto& p : curve) r.push_back(p.solo_return);
    return average_reward_over_time(r);
}

SummaryStats summarize(std::span<const double> values) {
    SummaryStats s;
    s.n = values.size();
    if (s.n == 0) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.sem = s.std / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

double run_score_tail(const RunResult& run, double after_fraction) {
    double total = 0.0;
    std::size_t learners = 0;
    for (const auto& curve : run.curves) {
        if (curve.empty()) continue;
        const double cutoff = after_fraction * static_cast<double>(curve.back().step);
        std::vector<double> tail;
        for (const auto& p : curve)
            if (static_cast<double>(p.step) > cutoff || after_fraction <= 0.0) tail.push_back(p.solo_return);
        total += average_reward_over_time(tail);
        ++learners;
    }
    if (learners == 0) throw ContractViolation("run has no learner curves");
    return total / static_cast<double>(learners);
}

double run_score(const RunResult& run) { return run_score_tail(run, 0.0); }

Comparison compare(std::span<const ExperimentConfig> configs, std::span<const std::vector<RunResult>> runs) {
    if (configs.size() != runs.size()) throw ContractViolation("compare: one run list per config");
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const auto& cfg = configs[c];
        if (cfg.seeds != configs.front().seeds)
            throw ConfigError("compare: config '" + cfg.name + "' uses a different seed list");
        if (cfg.env.type != configs.front().env.type || cfg.env.size != configs.front().env.size ||
            cfg.total_steps != configs.front().total_steps)
            throw ConfigError("compare: config '" + cfg.name + "' uses a different environment or step budget");
    }
    for (std::size_t c = 0; c < configs.size(); ++c)
        if (runs[c].size() != configs[c].seeds.size())
            throw ContractViolation("compare: missing runs for " + configs[c].name);
    Comparison out;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const auto& cfg = configs[c];
        std::vector<double> scores;
        for (const auto& r : runs[c]) scores.push_back(run_score(r));
        out.rows.push_back({cfg.name, summarize(scores)});

        CurveBand band;
        band.config_name = cfg.name;
        const auto& first = runs[c].front();
        const auto learner_curve = std::find_if(first.curves.begin(), first.curves.end(),
                                                [](const auto& cv) { return !cv.empty(); });
        for (std::size_t k = 0; k < learner_curve->size(); ++k) {
            std::vector<double> per_seed;
            for (const auto& r : runs[c]) {
                double sum = 0.0;
                std::size_t cnt = 0;
                for (const auto& cv : r.curves)
                    if (!cv.empty()) {
                        sum += cv[k].solo_return;
                        ++cnt;
                    }
                per_seed.push_back(sum / static_cast<double>(cnt));
            }
            const auto s = summarize(per_seed);
            band.steps.push_back((*learner_curve)[k].step);
            band.mean.push_back(s.mean);
            band.sem.push_back(s.sem);
        }
        out.bands.push_back(std::move(band));
    }
    return out;
}

std::vector<double> normalize_scores(std::span<const double> scores) {
    if (scores.empty()) return {};
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    std::vector<double> out;
    for (double s : scores) out.push_back(*hi == *lo ? 50.0 : 100.0 * (s - *lo) / (*hi - *lo));
    return out;
}

// ---------------------------------------------------------------------------

std::vector<SweepTask> sweep_tasks(std::span<const ExperimentConfig> configs) {
    std::vector<SweepTask> tasks;
    for (std::size_t c = 0; c < configs.size(); ++c)
        for (auto seed : configs[c].seeds) tasks.push_back({c, seed});
    return tasks;
}

int sweep_threads() {
    if (const char* env = std::getenv("PEERLAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::vector<RunResult> run_sweep_serial(std::span<const ExperimentConfig> configs,
                                        std::span<const SweepTask> tasks) {
    std::vector<RunResult> out;
    out.reserve(tasks.size());
    for (const auto& t : tasks) out.push_back(run_experiment(configs[t.config_index], t.seed));
    return out;
}

std::vector<RunResult> run_sweep(std::span<const ExperimentConfig> configs, std::span<const SweepTask> tasks,
                                 int threads) {
    if (threads <= 0) threads = sweep_threads();
    std::vector<RunResult> out(tasks.size());
    std::exception_ptr failure;
    const auto count = static_cast<long>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long k = 0; k < count; ++k) {
        try {
            out[k] = run_experiment(configs[tasks[k].config_index], tasks[k].seed);
        } catch (...) {
#pragma omp critical(peerlab_sweep_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<std::vector<RunResult>> run_configs(std::span<const ExperimentConfig> configs, int threads) {
    for (const auto& c : configs) c.validate();
    const auto tasks = sweep_tasks(configs);
    auto flat = run_sweep(configs, tasks, threads);
    std::vector<std::vector<RunResult>> grouped(configs.size());
    for (std::size_t k = 0; k < tasks.size(); ++k) grouped[tasks[k].config_index].push_back(std::move(flat[k]));
    return grouped;
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_curves_csv(std::ostream& out, std::span<const RunResult> runs, bool header) {
    if (header) out << "run_id,seed,agent_id,step,solo_return,train_return\n";
    for (const auto& r : runs)
        for (std::size_t a = 0; a < r.curves.size(); ++a)
            for (const auto& p : r.curves[a])
                out << r.run_id << ',' << r.seed << ',' << a << ',' << p.step << ',' << format_number(p.solo_return)
                    << ',' << format_number(p.train_return) << '\n';
}

void write_acceptance_csv(std::ostream& out, std::span<const RunResult> runs, bool header) {
    if (header) out << "run_id,seed,step,advisee,advisor,cumulative_count\n";
    for (const auto& r : runs) {
        const std::size_t n = r.group_size();
        for (const auto& snap : r.acceptance)
            for (AgentId i = 0; i < n; ++i) {
                if (!takes_steps(r.kinds[i])) continue;
                for (AgentId j = 0; j < n; ++j)
                    out << r.run_id << ',' << r.seed << ',' << snap.step << ',' << i << ',' << j << ','
                        << snap.counts[i * n + j] << '\n';
            }
    }
}

void write_trust_csv(std::ostream& out, std::span<const RunResult> runs, const MechanismSet& mechanisms,
                     bool header) {
    if (header) out << "run_id,seed,step,advisee,advisor,mechanism,value\n";
    for (const auto& r : runs) {
        const std::size_t n = r.group_size();
        for (const auto& snap : r.trust)
            for (AgentId i = 0; i < n; ++i) {
                if (!takes_steps(r.kinds[i])) continue;
                for (AgentId j = 0; j < n; ++j) {
                    if (mechanisms.trust)
                        out << r.run_id << ',' << r.seed << ',' << snap.step << ',' << i << ',' << j << ",trust,"
                            << format_number(snap.local[i * n + j]) << '\n';
                    if (mechanisms.agent)
                        out << r.run_id << ',' << r.seed << ',' << snap.step << ',' << i << ',' << j << ",agent,"
                            << format_number(snap.global[j]) << '\n';
                }
            }
    }
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
    out << "config_name,mean,std,sem,n_seeds\n";
    for (const auto& row : rows)
        out << row.config_name << ',' << format_number(row.stats.mean) << ',' << format_number(row.stats.std) << ','
            << format_number(row.stats.sem) << ',' << row.stats.n << '\n';
}

void write_outputs(const std::string& dir, std::span<const ExperimentConfig> configs,
                   std::span<const std::vector<RunResult>> runs) {
    fs::create_directories(dir);
    auto curves = open_csv(fs::path(dir) / "curves.csv");
    auto accept = open_csv(fs::path(dir) / "acceptance.csv");
    auto trust = open_csv(fs::path(dir) / "trust.csv");
    write_curves_csv(curves, {}, true);
    write_acceptance_csv(accept, {}, true);
    write_trust_csv(trust, {}, {}, true);
    for (std::size_t c = 0; c < configs.size(); ++c) {
        write_curves_csv(curves, runs[c], false);
        write_acceptance_csv(accept, runs[c], false);
        const auto& g = configs[c].group;
        write_trust_csv(trust, runs[c], g.rule == SelectionRule::Peer ? g.mechanisms : MechanismSet{}, false);
    }
    auto summary = open_csv(fs::path(dir) / "summary.csv");
    write_summary_csv(summary, compare(configs, runs).rows);
}

} // namespace peerlab
