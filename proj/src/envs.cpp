#include "peerlab/envs.hpp"

#include <algorithm>

namespace peerlab {

bool ActionSpace::contains(const ActionValue& a) const {
    if (discrete()) return a.is_discrete() && a.index() < count;
    if (a.is_discrete() || a.values().size() != dims) return false;
    return std::all_of(a.values().begin(), a.values().end(),
                       [&](double v) { return v >= low && v <= high; });
}

Cell room_move(Cell c, std::size_t a) {
    switch (a) {
    case kUp: return {c.x, c.y + 1};
    case kDown: return {c.x, c.y - 1};
    case kLeft: return {c.x - 1, c.y};
    case kRight: return {c.x + 1, c.y};
    default: throw ContractViolation("invalid room action");
    }
}

RoomEnv::RoomEnv(int size, int max_steps, double gamma)
    : size_(size), max_steps_(max_steps > 0 ? max_steps : 4 * size) {
    if (size < 3 || size % 2 == 0) throw ConfigError("room size must be odd and >= 3");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
    spec_.name = "room" + std::to_string(size);
    spec_.observation_dim = 4;
    spec_.actions = {ActionSpace::Kind::Discrete, kRoomActionCount, 0, 0.0, 0.0};
    spec_.gamma = gamma;
    spec_.horizon = max_steps_;
    agent_ = goal_ = center();
}

std::vector<Cell> RoomEnv::border_cells() const {
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(4 * (size_ - 1)));
    const int last = size_ - 1;
    for (int x = 0; x < last; ++x) cells.push_back({x, 0});
    for (int y = 0; y < last; ++y) cells.push_back({last, y});
    for (int x = last; x > 0; --x) cells.push_back({x, last});
    for (int y = last; y > 0; --y) cells.push_back({0, y});
    return cells;
}

Observation RoomEnv::reset(Rng& rng) {
    const auto cells = border_cells();
    goal_ = cells[rng.uniform_index(cells.size())];
    agent_ = center();
    steps_ = 0;
    done_ = false;
    return observe();
}

void RoomEnv::set_state(Cell agent, Cell goal) {
    auto inside = [&](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < size_ && c.y < size_; };
    if (!inside(agent) || !inside(goal)) throw ContractViolation("room cell outside grid");
    agent_ = agent;
    goal_ = goal;
    steps_ = 0;
    done_ = agent == goal;
}

Observation RoomEnv::observe() const {
    const double scale = 1.0 / (size_ - 1);
    return {agent_.x * scale, agent_.y * scale, goal_.x * scale, goal_.y * scale};
}

StepResult RoomEnv::step(const ActionValue& action) {
    if (done_) throw ContractViolation("step() on finished room episode");
    if (!spec_.actions.contains(action)) throw ContractViolation("invalid room action");
    const Cell next = room_move(agent_, action.index());
    if (next.x >= 0 && next.y >= 0 && next.x < size_ && next.y < size_) agent_ = next;
    ++steps_;
    StepResult r;
    if (agent_ == goal_) {
        r.reward = 1.0;
        r.done = true;
    } else if (steps_ >= max_steps_) {
        r.done = true;
        r.truncated = true;
    }
    done_ = r.done;
    r.observation = observe();
    return r;
}

RoomState decode_room_observation(std::span<const double> obs, int size) {
    if (obs.size() != 4) throw ContractViolation("room observation must have 4 components");
    auto cell = [&](double v) { return static_cast<int>(std::lround(v * (size - 1))); };
    return {size, {cell(obs[0]), cell(obs[1])}, {cell(obs[2]), cell(obs[3])}};
}

ActionValue optimal_action(const RoomState& s) {
    if (s.agent == s.goal) throw ContractViolation("optimal_action: agent already at goal");
    if (s.goal.x > s.agent.x) return ActionValue::discrete(kRight);
    if (s.goal.x < s.agent.x) return ActionValue::discrete(kLeft);
    if (s.goal.y > s.agent.y) return ActionValue::discrete(kUp);
    return ActionValue::discrete(kDown);
}

// ---------------------------------------------------------------------------

PointGoalEnv::PointGoalEnv(int max_steps, double max_speed, double goal_radius, double gamma, bool shaping)
    : max_steps_(max_steps), max_speed_(max_speed), radius_(goal_radius), shaping_(shaping) {
    if (max_steps < 1) throw ConfigError("point_goal max_steps must be >= 1");
    if (!(max_speed > 0.0)) throw ConfigError("point_goal max_speed must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
    spec_.name = "point_goal";
    spec_.observation_dim = 4;
    spec_.actions = {ActionSpace::Kind::Continuous, 0, 2, -max_speed, max_speed};
    spec_.gamma = gamma;
    spec_.horizon = max_steps;
}

Observation PointGoalEnv::reset(Rng& rng) {
    // Uniform position along the perimeter (length 8).
    const double u = rng.uniform(0.0, 8.0);
    const int side = std::min(static_cast<int>(u / 2.0), 3);
    const double t = u - 2.0 * side - 1.0;
    switch (side) {
    case 0: goal_ = {t, -1.0}; break;
    case 1: goal_ = {1.0, t}; break;
    case 2: goal_ = {-t, 1.0}; break;
    default: goal_ = {-1.0, -t}; break;
    }
    agent_ = {0.0, 0.0};
    steps_ = 0;
    done_ = false;
    return observe();
}

void PointGoalEnv::set_state(std::array<double, 2> agent, std::array<double, 2> goal) {
    agent_ = agent;
    goal_ = goal;
    steps_ = 0;
    done_ = distance() <= radius_;
}

Observation PointGoalEnv::observe() const { return {agent_[0], agent_[1], goal_[0], goal_[1]}; }

double PointGoalEnv::distance() const {
    return std::hypot(agent_[0] - goal_[0], agent_[1] - goal_[1]);
}

StepResult PointGoalEnv::step(const ActionValue& action) {
    if (done_) throw ContractViolation("step() on finished point_goal episode");
    if (action.is_discrete() || action.values().size() != 2)
        throw ContractViolation("point_goal expects a 2-D continuous action");
    const double before = distance();
    for (int k = 0; k < 2; ++k) {
        const double v = std::clamp(action.values()[k], -max_speed_, max_speed_);
        agent_[k] = std::clamp(agent_[k] + v, -1.0, 1.0);
    }
    ++steps_;
    const double after = distance();
    StepResult r;
    r.reward = shaping_ ? before - after : 0.0;
    if (after <= radius_) {
        r.reward += 1.0;
        r.done = true;
    } else if (steps_ >= max_steps_) {
        r.done = true;
        r.truncated = true;
    }
    done_ = r.done;
    r.observation = observe();
    return r;
}

} // namespace peerlab
