#include "peerlab/config.hpp"

#include <fstream>
#include <algorithm>

namespace peerlab {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (name.empty()) throw ConfigError("config name must not be empty");
    if (name.find_first_of("/\\,\n\"") != std::string::npos)
        throw ConfigError("config name must not contain path separators, commas or quotes");
    if (env.type == "room") {
        if (env.size < 3 || env.size % 2 == 0) throw ConfigError("room size must be odd and >= 3");
    } else if (env.type != "point_goal") {
        throw ConfigError("unknown env type '" + env.type + "' (room | point_goal)");
    }
    if (!(env.gamma >= 0.0 && env.gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
    if (agents.empty()) throw ConfigError("at least one agent is required");
    if (std::none_of(agents.begin(), agents.end(), takes_steps))
        throw ConfigError("at least one agent must be a learner");
    const bool continuous = env.type == "point_goal";
    for (AgentKind k : agents) {
        if (continuous && (k == AgentKind::Adversarial || k == AgentKind::OracleExpert))
            throw ConfigError(std::string(agent_kind_name(k)) + " agents require the room environment");
        if (k == AgentKind::ExpertFrozen && expert_checkpoint.empty())
            throw ConfigError("expert_frozen agent needs expert_checkpoint");
    }
    if (learner.type == "tabular" || learner.type == "neural_q") {
        if (continuous) throw ConfigError(learner.type + " learner needs a discrete action space");
    } else if (learner.type == "actor_critic") {
        if (!continuous) throw ConfigError("actor_critic learner needs a continuous action space");
    } else {
        throw ConfigError("unknown learner type '" + learner.type + "'");
    }
    if (!(learner.learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
    if (!(learner.network.actor_rate > 0.0)) throw ConfigError("actor_rate must be > 0");
    for (double e : {learner.epsilon_start, learner.epsilon_end, learner.epsilon_fraction})
        if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("epsilon settings must be in [0,1]");
    if (!(group.temperature.tau0 > 0.0)) throw ConfigError("tau0 must be positive");
    if (!(group.temperature.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (group.temperature.epoch_length == 0) throw ConfigError("epoch_length must be positive");
    if (!(group.alpha >= 0.0 && group.alpha <= 1.0)) throw ConfigError("alpha must be in [0,1]");
    if (group.rule == SelectionRule::Peer && group.mechanisms.count() == 0)
        throw ConfigError("peer selection needs at least one mechanism");
    if (group.buffer_capacity == 0 || group.batch_size == 0 || group.train_every == 0)
        throw ConfigError("buffer_capacity, batch_size and train_every must be positive");
    if (total_steps == 0) throw ConfigError("total_steps must be positive");
    if (eval_interval == 0 || eval_episodes == 0) throw ConfigError("eval_interval and eval_episodes must be positive");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
}

namespace {

// Reads `key` into `out` when present.
template <typename T>
void get(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("unknown field '" + it.key() + "' in " + where);
    }
}

} // namespace

void to_json(json& j, const ExperimentConfig& c) {
    json agents = json::array();
    for (AgentKind k : c.agents) agents.push_back(std::string(agent_kind_name(k)));
    const auto& g = c.group;
    const auto& l = c.learner;
    j = json{
        {"name", c.name},
        {"env", {{"type", c.env.type}, {"size", c.env.size}, {"max_steps", c.env.max_steps},
                 {"gamma", c.env.gamma}, {"max_speed", c.env.max_speed}, {"goal_radius", c.env.goal_radius},
                 {"shaping", c.env.shaping}}},
        {"agents", agents},
        {"expert_checkpoint", c.expert_checkpoint},
        {"selection", std::string(selection_rule_name(g.rule))},
        {"mechanisms", g.mechanisms.count() ? g.mechanisms.letters() : std::string()},
        {"advantage", g.mechanisms.advantage},
        {"tau0", g.temperature.tau0},
        {"lambda", g.temperature.lambda},
        {"epoch_length", g.temperature.epoch_length},
        {"alpha", g.alpha},
        {"buffer_capacity", g.buffer_capacity},
        {"batch_size", g.batch_size},
        {"learning_starts", g.learning_starts},
        {"train_every", g.train_every},
        {"early_budget", g.early_budget},
        {"trust_from_replay", g.trust_from_replay},
        {"learner", {{"type", l.type}, {"learning_rate", l.learning_rate},
                     {"epsilon_start", l.epsilon_start}, {"epsilon_end", l.epsilon_end},
                     {"epsilon_fraction", l.epsilon_fraction}, {"hidden", l.network.hidden},
                     {"target_period", l.network.target_period}, {"soft_rate", l.network.soft_rate},
                     {"noise_sigma", l.network.noise_sigma}, {"actor_rate", l.network.actor_rate},
                     {"novice_init_low", l.novice_init_low},
                     {"novice_init_high", l.novice_init_high}, {"init_scale", l.init_scale}}},
        {"total_steps", c.total_steps},
        {"eval_interval", c.eval_interval},
        {"eval_episodes", c.eval_episodes},
        {"seeds", c.seeds},
        {"output_dir", c.output_dir},
        {"save_checkpoints", c.save_checkpoints},
    };
}

void from_json(const json& j, ExperimentConfig& c) {
    try {
        reject_unknown(j, {"name", "env", "agents", "expert_checkpoint", "selection", "mechanisms", "advantage",
                           "tau0", "lambda", "epoch_length", "alpha", "buffer_capacity", "batch_size",
                           "learning_starts", "train_every", "early_budget", "trust_from_replay", "learner",
                           "total_steps", "eval_interval", "eval_episodes", "seeds", "output_dir",
                           "save_checkpoints"},
                       "config");
        get(j, "name", c.name);
        if (auto it = j.find("env"); it != j.end()) {
            reject_unknown(*it, {"type", "size", "max_steps", "gamma", "max_speed", "goal_radius", "shaping"}, "env");
            get(*it, "type", c.env.type);
            get(*it, "size", c.env.size);
            get(*it, "max_steps", c.env.max_steps);
            get(*it, "gamma", c.env.gamma);
            get(*it, "max_speed", c.env.max_speed);
            get(*it, "goal_radius", c.env.goal_radius);
            get(*it, "shaping", c.env.shaping);
        }
        if (auto it = j.find("agents"); it != j.end()) {
            c.agents.clear();
            for (const auto& a : *it) {
                // Either "kind" or {"kind": ..., "count": k}.
                if (a.is_string()) {
                    c.agents.push_back(parse_agent_kind(a.get<std::string>()));
                } else {
                    reject_unknown(a, {"kind", "count"}, "agents entry");
                    const auto kind = parse_agent_kind(a.at("kind").get<std::string>());
                    const auto count = a.value("count", std::size_t{1});
                    c.agents.insert(c.agents.end(), count, kind);
                }
            }
        }
        get(j, "expert_checkpoint", c.expert_checkpoint);
        if (auto it = j.find("selection"); it != j.end()) c.group.rule = parse_selection_rule(it->get<std::string>());
        bool advantage = c.group.mechanisms.advantage;
        get(j, "advantage", advantage);
        if (auto it = j.find("mechanisms"); it != j.end()) {
            const auto letters = it->get<std::string>();
            c.group.mechanisms = letters.empty() ? MechanismSet{} : MechanismSet::parse(letters);
        }
        c.group.mechanisms.advantage = advantage;
        get(j, "tau0", c.group.temperature.tau0);
        get(j, "lambda", c.group.temperature.lambda);
        get(j, "epoch_length", c.group.temperature.epoch_length);
        get(j, "alpha", c.group.alpha);
        get(j, "buffer_capacity", c.group.buffer_capacity);
        get(j, "batch_size", c.group.batch_size);
        get(j, "learning_starts", c.group.learning_starts);
        get(j, "train_every", c.group.train_every);
        get(j, "early_budget", c.group.early_budget);
        get(j, "trust_from_replay", c.group.trust_from_replay);
        if (auto it = j.find("learner"); it != j.end()) {
            reject_unknown(*it, {"type", "learning_rate", "epsilon_start", "epsilon_end", "epsilon_fraction",
                                 "hidden", "target_period", "soft_rate", "noise_sigma", "actor_rate",
                                 "novice_init_low", "novice_init_high", "init_scale"},
                           "learner");
            auto& l = c.learner;
            get(*it, "type", l.type);
            get(*it, "learning_rate", l.learning_rate);
            get(*it, "epsilon_start", l.epsilon_start);
            get(*it, "epsilon_end", l.epsilon_end);
            get(*it, "epsilon_fraction", l.epsilon_fraction);
            get(*it, "hidden", l.network.hidden);
            get(*it, "target_period", l.network.target_period);
            get(*it, "soft_rate", l.network.soft_rate);
            get(*it, "noise_sigma", l.network.noise_sigma);
            get(*it, "actor_rate", l.network.actor_rate);
            get(*it, "novice_init_low", l.novice_init_low);
            get(*it, "novice_init_high", l.novice_init_high);
            get(*it, "init_scale", l.init_scale);
            l.network.learning_rate = l.learning_rate;
        }
        get(j, "total_steps", c.total_steps);
        get(j, "eval_interval", c.eval_interval);
        get(j, "eval_episodes", c.eval_episodes);
        get(j, "seeds", c.seeds);
        get(j, "output_dir", c.output_dir);
        get(j, "save_checkpoints", c.save_checkpoints);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

namespace {

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
    return j;
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    ExperimentConfig c;
    from_json(read_json(path), c);
    return c;
}

std::vector<ExperimentConfig> load_configs(const std::string& path) {
    const json j = read_json(path);
    std::vector<ExperimentConfig> out;
    if (!j.is_array()) {
        out.emplace_back();
        from_json(j, out.back());
        return out;
    }
    if (j.empty()) throw ConfigError("'" + path + "' holds an empty config list");
    for (const auto& item : j) {
        out.emplace_back();
        from_json(item, out.back());
    }
    return out;
}

void save_config(const ExperimentConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file '" + path + "'");
    out << json(config).dump(2) << '\n';
}

std::unique_ptr<Environment> make_environment(const EnvConfig& env) {
    if (env.type == "room") return std::make_unique<RoomEnv>(env.size, env.max_steps, env.gamma);
    if (env.type == "point_goal")
        return std::make_unique<PointGoalEnv>(env.max_steps > 0 ? env.max_steps : 50, env.max_speed,
                                              env.goal_radius, env.gamma, env.shaping);
    throw ConfigError("unknown env type '" + env.type + "'");
}

} // namespace peerlab
