#pragma once

#include "peerlab/config.hpp"

namespace peerlab {

// Experiment families. Each takes a base config (environment, budget, seeds,
// learner settings) and returns the configs to run side by side; the base's
// agent list and selection rule are replaced.

/// Solo learner vs. a group of `group_size` learners with the base mechanisms.
std::vector<ExperimentConfig> peer_vs_single(const ExperimentConfig& base, std::size_t group_size = 4);

/// Mechanism ablation: {A, C, T} combinations with and without advantage,
/// plus the single agent ("RL") and random advice ("Random"). 16 rows.
std::vector<ExperimentConfig> ablation(const ExperimentConfig& base, std::size_t group_size = 4);

/// Peer groups of each size in `sizes`.
std::vector<ExperimentConfig> group_sizes(const ExperimentConfig& base, std::span<const std::size_t> sizes);

/// Poisoning study: single agent, `learners` peers, the same plus an
/// adversary, and both groups under random advice.
std::vector<ExperimentConfig> adversary_study(const ExperimentConfig& base, std::size_t learners = 3);

/// Two learners, an expert and a frozen novice. The expert is the scripted
/// oracle unless `expert_checkpoint` names a saved learner.
ExperimentConfig expert_study(const ExperimentConfig& base, const std::string& expert_checkpoint = "");

} // namespace peerlab
