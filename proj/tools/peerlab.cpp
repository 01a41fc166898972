// Command-line front end: runs experiment families and renders result plots.

#include "peerlab/harness.hpp"
#include "peerlab/presets.hpp"
#include "peerlab/svg_plot.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace peerlab;

namespace {

enum Exit { kOk = 0, kConfigError = 1, kRuntimeError = 2 };

// Options shared by every experiment command. Unset options leave the config alone.
struct Overrides {
    std::string config;
    std::vector<std::string> configs;  // compare only
    std::optional<std::uint64_t> seed;
    std::string seeds;
    std::optional<std::size_t> steps;
    std::string agents;
    std::string mechanisms;
    std::optional<bool> advantage;
    std::string selection;
    std::optional<int> env_size;
    std::string out;
    bool dump_config = false;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    try {
        while (std::getline(ss, item, ',')) {
            const auto dash = item.find('-');
            if (dash == std::string::npos) {
                seeds.push_back(std::stoull(item));
            } else {
                const auto lo = std::stoull(item.substr(0, dash)), hi = std::stoull(item.substr(dash + 1));
                if (hi < lo) throw ConfigError("bad seed range '" + item + "'");
                for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
            }
        }
    } catch (const std::logic_error&) {
        throw ConfigError("bad seed list '" + text + "' (use e.g. 1,2,3 or 1-10)");
    }
    if (seeds.empty()) throw ConfigError("empty seed list");
    return seeds;
}

// "learner*3,adversarial" -> {learner, learner, learner, adversarial}
std::vector<AgentKind> parse_agents(const std::string& text) {
    std::vector<AgentKind> agents;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t count = 1;
        if (const auto star = item.find('*'); star != std::string::npos) {
            try {
                count = std::stoul(item.substr(star + 1));
            } catch (const std::logic_error&) {
                throw ConfigError("bad agent count in '" + item + "'");
            }
            item = item.substr(0, star);
        }
        const AgentKind k = parse_agent_kind(item);
        agents.insert(agents.end(), count, k);
    }
    if (agents.empty()) throw ConfigError("empty agent list");
    return agents;
}

ExperimentConfig load_base(const std::string& path) { return path.empty() ? ExperimentConfig{} : load_config(path); }

void apply(const Overrides& o, ExperimentConfig& c) {
    if (o.seed) c.seeds = {*o.seed};
    if (!o.seeds.empty()) c.seeds = parse_seeds(o.seeds);
    if (o.steps) c.total_steps = *o.steps;
    if (!o.agents.empty()) c.agents = parse_agents(o.agents);
    if (!o.mechanisms.empty()) c.group.mechanisms = MechanismSet::parse(o.mechanisms, c.group.mechanisms.advantage);
    if (o.advantage) c.group.mechanisms.advantage = *o.advantage;
    if (!o.selection.empty()) c.group.rule = parse_selection_rule(o.selection);
    if (o.env_size) c.env.size = *o.env_size;
    if (!o.out.empty()) c.output_dir = o.out;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Run a single master seed");
    cmd->add_option("--seeds", o.seeds, "Seed list, e.g. 1,2,3 or 1-10");
    cmd->add_option("--steps", o.steps, "Training steps per learning agent");
    cmd->add_option("--mechanisms", o.mechanisms, "Trust mechanisms as letters from A, C, T");
    cmd->add_flag("--advantage,!--no-advantage", o.advantage, "Learn trust with advantage");
    cmd->add_option("--env-size", o.env_size, "Room side length (odd)");
    cmd->add_option("--out", o.out, "Output directory for CSV files");
    cmd->add_flag("--dump-config", o.dump_config, "Print the resolved configs as JSON and exit");
}

void print_summary(const std::vector<ExperimentConfig>& configs, const std::vector<std::vector<RunResult>>& runs) {
    const auto cmp = compare(configs, runs);
    std::vector<double> means;
    for (const auto& r : cmp.rows) means.push_back(r.stats.mean);
    const auto norm = normalize_scores(means);
    std::printf("%-20s %10s %10s %10s %6s %6s\n", "config", "mean", "std", "sem", "seeds", "score");
    for (std::size_t k = 0; k < cmp.rows.size(); ++k) {
        const auto& r = cmp.rows[k];
        std::printf("%-20s %10.4f %10.4f %10.4f %6zu %6.1f\n", r.config_name.c_str(), r.stats.mean, r.stats.std,
                    r.stats.sem, r.stats.n, norm[k]);
    }
}

int execute(std::vector<ExperimentConfig> configs, const Overrides& o, int threads) {
    for (auto& c : configs) {
        apply(o, c);
        c.validate();
    }
    if (o.dump_config) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& c : configs) j.push_back(c);
        std::cout << (configs.size() == 1 ? j[0] : j).dump(2) << '\n';
        return kOk;
    }
    const auto runs = run_configs(configs, threads);
    if (!o.out.empty()) {
        write_outputs(o.out, configs, runs);
        nlohmann::json j = nlohmann::json::array();
        for (const auto& c : configs) j.push_back(c);
        std::ofstream(std::filesystem::path(o.out) / "configs.json") << j.dump(2) << '\n';
    }
    print_summary(configs, runs);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Peer learning experiments: train together, evaluate alone."};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads for seed sweeps (default: all cores)");

    Overrides o;
    auto* run = app.add_subcommand("run", "Run one experiment config on its seeds");
    run->add_option("--config", o.config, "Config file (JSON object or array of objects)")->check(CLI::ExistingFile);
    run->add_option("--agents", o.agents, "Agent kinds, e.g. learner*3,adversarial");
    run->add_option("--selection", o.selection, "peer | random | early | solo");
    add_common(run, o);

    auto* cmp = app.add_subcommand("compare", "Run several configs side by side");
    cmp->add_option("--config", o.configs, "Config files (repeat the flag)")->required()->check(CLI::ExistingFile);
    add_common(cmp, o);

    std::size_t group = 4;
    auto* ablate = app.add_subcommand("ablate", "Mechanism ablation: 14 combinations plus RL and Random");
    ablate->add_option("--config", o.config, "Base config file")->check(CLI::ExistingFile);
    ablate->add_option("--group-size", group, "Learners per group");
    add_common(ablate, o);

    std::string sizes = "2,4,6,8,10";
    auto* gsize = app.add_subcommand("groupsize", "Sweep the number of learners in a group");
    gsize->add_option("--config", o.config, "Base config file")->check(CLI::ExistingFile);
    gsize->add_option("--sizes", sizes, "Comma-separated group sizes");
    add_common(gsize, o);

    std::size_t learners = 3;
    auto* adv = app.add_subcommand("adversary", "Poisoning study with one adversarial advisor");
    adv->add_option("--config", o.config, "Base config file")->check(CLI::ExistingFile);
    adv->add_option("--learners", learners, "Honest learners in the group");
    add_common(adv, o);

    std::string expert_ckpt;
    auto* expert = app.add_subcommand("expertstudy", "Two learners with an expert and a frozen novice");
    expert->add_option("--config", o.config, "Base config file")->check(CLI::ExistingFile);
    expert->add_option("--expert-checkpoint", expert_ckpt, "Saved learner to use as the expert (default: oracle)");
    add_common(expert, o);

    std::string plot_in, plot_out;
    auto* plot = app.add_subcommand("plot", "Render SVG learning curves from a results directory");
    plot->add_option("--in", plot_in, "Directory containing curves.csv")->required();
    plot->add_option("--out", plot_out, "Directory for the SVG files (default: --in)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return execute(o.config.empty() ? std::vector<ExperimentConfig>{{}} : load_configs(o.config), o,
                                 threads);
        if (*cmp) {
            std::vector<ExperimentConfig> configs;
            for (const auto& path : o.configs)
                for (auto& c : load_configs(path)) configs.push_back(std::move(c));
            return execute(std::move(configs), o, threads);
        }
        if (*ablate) return execute(ablation(load_base(o.config), group), o, threads);
        if (*gsize) {
            std::vector<std::size_t> n;
            for (auto s : parse_seeds(sizes)) n.push_back(static_cast<std::size_t>(s));
            return execute(group_sizes(load_base(o.config), n), o, threads);
        }
        if (*adv) return execute(adversary_study(load_base(o.config), learners), o, threads);
        if (*expert) return execute({expert_study(load_base(o.config), expert_ckpt)}, o, threads);
        if (*plot) {
            for (const auto& path : plot_curves(plot_in, plot_out.empty() ? plot_in : plot_out))
                std::cout << path << '\n';
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
