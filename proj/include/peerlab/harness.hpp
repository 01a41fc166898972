#pragma once

#include "peerlab/config.hpp"

#include <functional>

namespace peerlab {

using Policy = std::function<ActionValue(const Observation&)>;

/// Mean undiscounted return of `episodes` greedy rollouts on fresh copies of
/// `prototype`. No advice, no learning.
double evaluate_alone(const Policy& policy, const Environment& prototype, std::size_t episodes, Rng& rng);
double evaluate_alone(const Learner& learner, const Environment& prototype, std::size_t episodes, Rng& rng);

struct CurvePoint {
    std::size_t step = 0;
    double solo_return = 0.0;
    double train_return = 0.0;  // mean of training episodes finished since the previous checkpoint
};

struct AcceptanceSnapshot {
    std::size_t step = 0;
    std::vector<std::size_t> counts;  // row-major (advisee, advisor), cumulative
};

struct TrustSnapshot {
    std::size_t step = 0;
    std::vector<double> local;   // row-major (advisee, advisor)
    std::vector<double> global;  // per advisor
};

struct RunResult {
    std::string run_id;
    std::uint64_t seed = 0;
    std::vector<AgentKind> kinds;
    std::vector<std::vector<CurvePoint>> curves;  // per agent; empty for advisor-only agents
    std::vector<AcceptanceSnapshot> acceptance;
    std::vector<TrustSnapshot> trust;
    std::vector<std::size_t> decisions;  // peer decisions per agent
    double wall_seconds = 0.0;

    std::size_t group_size() const { return kinds.size(); }
    std::size_t count(std::size_t snapshot, AgentId advisee, AgentId advisor) const {
        return acceptance[snapshot].counts[advisee * group_size() + advisor];
    }
};

/// Builds the learner for agent `id` of `config` (random-initialised and
/// frozen for novices, loaded from the checkpoint for frozen experts).
std::unique_ptr<Learner> make_learner(const ExperimentConfig& config, AgentKind kind, const EnvSpec& spec,
                                      std::uint64_t seed, AgentId id);

/// Trains the group for `total_steps` per learner and evaluates every
/// `eval_interval` steps. Writes per-run CSVs under
/// <output_dir>/runs/<name>/seed_<seed>/ as checkpoints complete.
/// `observer`, when set, sees every learner step as it happens.
RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const PeerGroup::StepObserver& observer = {});

// ---------------------------------------------------------------------------
// Metrics.

/// Mean of the solo returns of a curve (proportional to the area under it).
double average_reward_over_time(std::span<const CurvePoint> curve);
double average_reward_over_time(std::span<const double> returns);

struct SummaryStats {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation
    double sem = 0.0;
    std::size_t n = 0;
};

SummaryStats summarize(std::span<const double> values);

/// Per-seed score: average reward over time averaged across the run's learners.
double run_score(const RunResult& run);
/// Same, restricted to checkpoints with step > `after_fraction` * last step.
double run_score_tail(const RunResult& run, double after_fraction);

struct SummaryRow {
    std::string config_name;
    SummaryStats stats;
};

struct CurveBand {
    std::string config_name;
    std::vector<std::size_t> steps;
    std::vector<double> mean;
    std::vector<double> sem;
};

struct Comparison {
    std::vector<SummaryRow> rows;
    std::vector<CurveBand> bands;
};

/// One summary row and curve band per config. `runs[c]` holds config c's
/// runs; every config must have been run on the same seed list.
Comparison compare(std::span<const ExperimentConfig> configs, std::span<const std::vector<RunResult>> runs);

/// Min-max rescaling of scores to [0, 100] (all 50 when they are equal).
std::vector<double> normalize_scores(std::span<const double> scores);

// ---------------------------------------------------------------------------
// Sweeps: independent (config, seed) tasks fanned out to an OpenMP pool.

struct SweepTask {
    std::size_t config_index = 0;
    std::uint64_t seed = 0;
};

std::vector<SweepTask> sweep_tasks(std::span<const ExperimentConfig> configs);

/// Worker count: PEERLAB_THREADS when set, otherwise the OpenMP default.
int sweep_threads();

/// Results are ordered like `tasks` and identical to run_sweep_serial.
std::vector<RunResult> run_sweep(std::span<const ExperimentConfig> configs, std::span<const SweepTask> tasks,
                                 int threads = 0);
/// Reference implementation: one task after another on the calling thread.
std::vector<RunResult> run_sweep_serial(std::span<const ExperimentConfig> configs,
                                        std::span<const SweepTask> tasks);

/// Runs every config on its seeds and groups results per config.
std::vector<std::vector<RunResult>> run_configs(std::span<const ExperimentConfig> configs, int threads = 0);

// ---------------------------------------------------------------------------
// Persistence.

void write_curves_csv(std::ostream& out, std::span<const RunResult> runs, bool header = true);
void write_acceptance_csv(std::ostream& out, std::span<const RunResult> runs, bool header = true);
void write_trust_csv(std::ostream& out, std::span<const RunResult> runs, const MechanismSet& mechanisms,
                     bool header = true);
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

/// Writes curves.csv, acceptance.csv, trust.csv and summary.csv into `dir`.
void write_outputs(const std::string& dir, std::span<const ExperimentConfig> configs,
                   std::span<const std::vector<RunResult>> runs);

/// Formats a double the way every CSV in this project does.
std::string format_number(double v);

} // namespace peerlab
