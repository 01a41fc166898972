#pragma once

#include "peerlab/learners.hpp"
#include "peerlab/peer_group.hpp"

#include "json.hpp"

namespace peerlab {

struct EnvConfig {
    std::string type = "room";  // room | point_goal
    int size = 11;              // room only, odd
    int max_steps = 0;          // 0: room default 4 * size, point_goal default 50
    double gamma = 0.9;
    double max_speed = 0.1;     // point_goal only
    double goal_radius = 0.05;  // point_goal only
    bool shaping = true;        // point_goal only: add the per-step distance decrease to the reward
};

struct LearnerConfig {
    std::string type = "tabular";  // tabular | neural_q | actor_critic
    double learning_rate = 0.5;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_fraction = 0.2;  // share of total steps spent decaying
    NetworkConfig network;
    double novice_init_low = 0.0;   // tabular novices draw Q ~ U(low, high)
    double novice_init_high = 1.0;
    double init_scale = 1e-6;       // tabular learners draw Q ~ U(0, init_scale); breaks argmax ties
};

/// Everything needed to reproduce one experiment family across seeds.
struct ExperimentConfig {
    std::string name = "experiment";
    EnvConfig env;
    std::vector<AgentKind> agents{AgentKind::Learner};
    std::string expert_checkpoint;  // required when an expert_frozen agent is present

    GroupOptions group;
    LearnerConfig learner;

    std::size_t total_steps = 200000;  // per learning agent
    std::size_t eval_interval = 2000;
    std::size_t eval_episodes = 20;
    std::vector<std::uint64_t> seeds{1};
    std::string output_dir;  // empty: nothing written
    bool save_checkpoints = false;

    /// Throws ConfigError on invalid settings.
    void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing fields keep their defaults; unknown fields are rejected.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig load_config(const std::string& path);
/// Accepts a single config object or an array of them.
std::vector<ExperimentConfig> load_configs(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

std::unique_ptr<Environment> make_environment(const EnvConfig& env);

} // namespace peerlab
