#pragma once

#include "peerlab/core.hpp"
#include "peerlab/envs.hpp"
#include "peerlab/mlp.hpp"

#include <iosfwd>
#include <memory>

namespace peerlab {

enum class ActMode { Explore, Greedy };

/// Linear decay from `start` to `end` over `decay_steps` env steps, then flat.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.05;
    std::size_t decay_steps = 1;

    double at(std::size_t step) const;
};

using Batch = std::span<const Transition* const>;

/// Off-policy learner exposing the two things a peer needs: a policy (to act
/// and to advise) and a Q-function (to judge advice).
class Learner {
public:
    virtual ~Learner() = default;

    /// Greedy mode is a pure function of the parameters and ignores `rng`.
    virtual ActionValue act(const Observation& obs, ActMode mode, Rng& rng) const = 0;
    virtual ActionValue greedy_action(const Observation& obs) const = 0;
    virtual double q_value(const Observation& obs, const ActionValue& action) const = 0;

    /// One training step on `batch`; returns the loss. Throws on frozen learners.
    double update(Batch batch);
    double update(std::span<const Transition> batch);

    virtual std::unique_ptr<Learner> clone() const = 0;
    virtual std::string kind() const = 0;
    virtual std::vector<Tensor> to_tensors() const = 0;
    virtual void from_tensors(const std::vector<Tensor>& tensors) = 0;
    /// All trainable parameters flattened (used for checksums and purity checks).
    virtual std::vector<double> parameters() const = 0;

    void save(std::ostream& out) const;
    void load(std::istream& in);
    std::uint64_t checksum() const;

    /// Frozen learners never change: equivalent to a learning rate of 0.
    void freeze() { frozen_ = true; }
    bool trainable() const { return !frozen_; }

    void set_epsilon_schedule(EpsilonSchedule s) { epsilon_ = s; }
    double epsilon() const { return epsilon_.at(env_steps_); }
    void advance(std::size_t env_steps = 1) { env_steps_ += env_steps; }
    std::size_t env_steps() const { return env_steps_; }

protected:
    virtual double do_update(Batch batch) = 0;

private:
    bool frozen_ = false;
    EpsilonSchedule epsilon_;
    std::size_t env_steps_ = 0;
};

// ---------------------------------------------------------------------------

/// Maps observations with components in [lo, hi] onto a dense grid index.
struct StateGrid {
    std::size_t dims = 0;
    int levels = 0;   // cells per component
    double lo = 0.0;
    double hi = 1.0;

    std::size_t cell_count() const;
    std::size_t index(std::span<const double> obs) const;
    std::size_t index(const Observation& obs) const { return index(view(obs)); }
};

class TabularQ final : public Learner {
public:
    TabularQ(StateGrid grid, std::size_t action_count, double learning_rate, double gamma);

    ActionValue act(const Observation& obs, ActMode mode, Rng& rng) const override;
    ActionValue greedy_action(const Observation& obs) const override;
    double q_value(const Observation& obs, const ActionValue& action) const override;
    std::unique_ptr<Learner> clone() const override { return std::make_unique<TabularQ>(*this); }
    std::string kind() const override { return "tabular_q"; }
    std::vector<Tensor> to_tensors() const override;
    void from_tensors(const std::vector<Tensor>& tensors) override;
    std::vector<double> parameters() const override { return table_; }

    /// Fills the table with U(lo, hi); a frozen random-init learner acts as a
    /// consistent but arbitrary policy.
    void randomize(double lo, double hi, Rng& rng);

    std::size_t greedy(std::size_t state) const;
    double entry(std::size_t state, std::size_t action) const { return table_[state * actions_ + action]; }
    const StateGrid& grid() const { return grid_; }
    double learning_rate() const { return lr_; }

protected:
    double do_update(Batch batch) override;

private:
    StateGrid grid_;
    std::size_t actions_;
    double lr_;
    double gamma_;
    std::vector<double> table_;
};

struct NetworkConfig {
    int hidden = 64;
    double learning_rate = 1e-3;
    std::size_t target_period = 500;  // NeuralQ hard copy period, in updates
    double soft_rate = 0.005;         // ActorCriticLite target tracking rate
    double noise_sigma = 0.1;         // ActorCriticLite exploration, fraction of action bound
    double actor_rate = 0.1;          // ActorCriticLite actor step size as a fraction of learning_rate
};

/// DQN-style learner: online and target MLPs, hard target copies.
class NeuralQ final : public Learner {
public:
    NeuralQ(std::size_t observation_dim, std::size_t action_count, double gamma, NetworkConfig cfg,
            Rng& init_rng);

    ActionValue act(const Observation& obs, ActMode mode, Rng& rng) const override;
    ActionValue greedy_action(const Observation& obs) const override;
    double q_value(const Observation& obs, const ActionValue& action) const override;
    std::unique_ptr<Learner> clone() const override { return std::make_unique<NeuralQ>(*this); }
    std::string kind() const override { return "neural_q"; }
    std::vector<Tensor> to_tensors() const override;
    void from_tensors(const std::vector<Tensor>& tensors) override;
    std::vector<double> parameters() const override { return online_.flat_parameters(); }

    Vector q_values(const Observation& obs) const;
    /// Mean squared TD error against the target network and its gradient
    /// w.r.t. the online parameters (flattened like parameters()).
    std::pair<double, std::vector<double>> loss_and_gradient(Batch batch) const;
    double loss(Batch batch) const { return loss_and_gradient(batch).first; }
    void set_parameters(std::span<const double> p) { online_.set_flat_parameters(p); }
    void sync_target() { target_ = online_; }
    const Mlp& online() const { return online_; }
    const Mlp& target() const { return target_; }
    std::size_t updates() const { return updates_; }

protected:
    double do_update(Batch batch) override;

private:
    Matrix gather_states(Batch batch, bool next) const;
    double td_loss(Batch batch, Mlp::Gradients& grads) const;

    std::size_t obs_dim_;
    std::size_t actions_;
    double gamma_;
    NetworkConfig cfg_;
    Mlp online_;
    Mlp target_;
    Adam optimizer_;
    std::size_t updates_ = 0;
};

/// Minimal deterministic actor-critic (DDPG-style) for continuous actions.
class ActorCriticLite final : public Learner {
public:
    ActorCriticLite(std::size_t observation_dim, const ActionSpace& space, double gamma,
                    NetworkConfig cfg, Rng& init_rng);

    ActionValue act(const Observation& obs, ActMode mode, Rng& rng) const override;
    ActionValue greedy_action(const Observation& obs) const override;
    double q_value(const Observation& obs, const ActionValue& action) const override;
    std::unique_ptr<Learner> clone() const override {
        return std::make_unique<ActorCriticLite>(*this);
    }
    std::string kind() const override { return "actor_critic"; }
    std::vector<Tensor> to_tensors() const override;
    void from_tensors(const std::vector<Tensor>& tensors) override;
    std::vector<double> parameters() const override;

    const Mlp& actor() const { return actor_; }
    const Mlp& critic() const { return critic_; }

protected:
    double do_update(Batch batch) override;

private:
    RealVec policy(const Observation& obs) const;

    std::size_t obs_dim_;
    ActionSpace space_;
    double gamma_;
    NetworkConfig cfg_;
    Mlp actor_, critic_, actor_target_, critic_target_;
    Adam actor_opt_, critic_opt_;
};

} // namespace peerlab
