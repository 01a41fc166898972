#pragma once

#include "peerlab/core.hpp"

#include <array>
#include <cstdlib>
#include <memory>

namespace peerlab {

struct ActionSpace {
    enum class Kind { Discrete, Continuous };
    Kind kind = Kind::Discrete;
    std::size_t count = 0;     // discrete action count
    std::size_t dims = 0;      // continuous dimension
    double low = 0.0, high = 0.0;

    bool discrete() const { return kind == Kind::Discrete; }
    /// True when `a` has the right kind and is within range / dimension.
    bool contains(const ActionValue& a) const;
};

/// Static description shared by every copy of an environment.
struct EnvSpec {
    std::string name;
    std::size_t observation_dim = 0;
    ActionSpace actions;
    double gamma = 0.99;
    int horizon = 1;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    bool truncated = false;  // done because the horizon was reached
};

class Environment {
public:
    virtual ~Environment() = default;

    virtual const EnvSpec& spec() const = 0;
    virtual Observation reset(Rng& rng) = 0;
    /// Throws ContractViolation when the episode is already over.
    virtual StepResult step(const ActionValue& action) = 0;
    virtual bool done() const = 0;
    virtual std::unique_ptr<Environment> clone() const = 0;
};

// ---------------------------------------------------------------------------
// Room: square grid, agent starts in the centre, goal on a random border cell.

struct Cell {
    int x = 0, y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

inline int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

enum RoomAction : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr std::size_t kRoomActionCount = 4;

/// Cell reached from `c` by `a`, ignoring walls.
Cell room_move(Cell c, std::size_t a);

struct RoomState {
    int size = 0;
    Cell agent;
    Cell goal;
};

class RoomEnv final : public Environment {
public:
    /// `size` must be odd and >= 3. `max_steps` <= 0 selects 4 * size.
    explicit RoomEnv(int size, int max_steps = 0, double gamma = 0.99);

    const EnvSpec& spec() const override { return spec_; }
    Observation reset(Rng& rng) override;
    StepResult step(const ActionValue& action) override;
    bool done() const override { return done_; }
    std::unique_ptr<Environment> clone() const override { return std::make_unique<RoomEnv>(*this); }

    int size() const { return size_; }
    int max_steps() const { return max_steps_; }
    int step_count() const { return steps_; }
    Cell agent() const { return agent_; }
    Cell goal() const { return goal_; }
    Cell center() const { return {(size_ - 1) / 2, (size_ - 1) / 2}; }
    RoomState state() const { return {size_, agent_, goal_}; }

    /// Places agent and goal directly (tests, scripted evaluation).
    void set_state(Cell agent, Cell goal);
    Observation observe() const;

    /// All 4(N-1) border cells in a fixed order.
    std::vector<Cell> border_cells() const;

private:
    int size_;
    int max_steps_;
    EnvSpec spec_;
    Cell agent_;
    Cell goal_;
    int steps_ = 0;
    bool done_ = true;
};

/// Decodes a normalised Room observation back into grid coordinates.
RoomState decode_room_observation(std::span<const double> obs, int size);

/// Move that strictly reduces Manhattan distance to the goal, horizontal
/// moves preferred. Throws ContractViolation when agent is already on the goal.
ActionValue optimal_action(const RoomState& state);

// ---------------------------------------------------------------------------
// PointGoal: continuous 2-D point mass, goal on the border of [-1,1]^2.
//
// Reward is +1 on reaching the goal. With `shaping`, every step also earns the
// decrease in distance to the goal (potential-based, the optimal policy stays the same).

class PointGoalEnv final : public Environment {
public:
    explicit PointGoalEnv(int max_steps = 50, double max_speed = 0.1, double goal_radius = 0.05,
                          double gamma = 0.99, bool shaping = true);

    const EnvSpec& spec() const override { return spec_; }
    Observation reset(Rng& rng) override;
    StepResult step(const ActionValue& action) override;
    bool done() const override { return done_; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<PointGoalEnv>(*this);
    }

    std::array<double, 2> agent() const { return agent_; }
    std::array<double, 2> goal() const { return goal_; }
    void set_state(std::array<double, 2> agent, std::array<double, 2> goal);
    Observation observe() const;
    double goal_radius() const { return radius_; }

private:
    double distance() const;

    int max_steps_;
    double max_speed_;
    double radius_;
    bool shaping_;
    EnvSpec spec_;
    std::array<double, 2> agent_{};
    std::array<double, 2> goal_{};
    int steps_ = 0;
    bool done_ = true;
};

} // namespace peerlab
