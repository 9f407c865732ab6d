#pragma once

// Run configuration: defaults reproduce the published hyperparameter table,
// parsing is strict (unknown keys rejected), and the fully-resolved config
// echoes back out so a run is reproducible from its own output directory.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amnav/agents.hpp"
#include "amnav/curriculum.hpp"

namespace amnav::config {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline json default_config() {
    return json{
        {"algorithm", "td3"},
        {"seed", 1},
        {"agent",
         {{"hidden_sizes", {400, 300}},
          {"learning_rate", 1e-3},
          {"gradient_threshold", 1.0},
          {"discount", 0.99},
          {"mini_batch_size", 256},
          {"buffer_capacity", 1000000},
          {"target_smooth_factor", 5e-3},
          {"epochs", 3},
          {"max_minibatches_per_epoch", 100},
          {"policy_update_frequency", 1},
          {"target_update_frequency", 1},
          {"exploration_stddev", 0.1},
          {"ou_mean_attraction", 1.0},
          {"ou_stddev", 0.1},
          {"smoothing_stddev", 0.05},
          {"smoothing_stddev_min", 0.05},
          {"smoothing_clip", 0.5}}},
        {"physics",
         {{"gravity", 9.81},
          {"sample_time", 0.01},
          {"attitude_time_constant", 0.1},
          {"mass", 0.7}}},
        {"deposition",
         {{"density", 1700.0}, {"nozzle_diameter", 0.008}, {"exit_velocity", 0.5}}},
        {"wind",
         {{"mean_force", {0.1, 0.1, 0.0}}, {"gust_amplitude", {0.2, 0.2, 0.2}}}},
        {"env",
         {{"waypoint_advance_radius", 0.1},
          {"terminal_velocity_threshold", 0.1},
          {"crash_height", 0.1},
          {"out_of_bounds_distance", 10.0},
          {"max_steps", 2000},
          {"reward_weight", 1.0},
          {"noise_scale", 1.0},  // multiplier on the default 1% noise halfwidths
          {"fixed_start", {0.0, 0.0, 1.5}},
          {"start_box_min", {-5.0, -5.0, 0.5}},
          {"start_box_max", {5.0, 5.0, 5.0}},
          {"waypoint_box_min", {-5.0, -5.0, 0.5}},
          {"waypoint_box_max", {5.0, 5.0, 5.0}}}},
        {"curriculum",
         {{"enabled", false},
          {"stages", {"C1", "C2", "C3", "C4"}},
          {"waypoint_count", 2},
          {"completion_bonus", 10.0},
          {"deviation_penalty", 0.1},
          {"mass_jitter", 0.2},
          {"promotion",
           {{"window", 50}, {"success_ratio", 0.8}, {"min_episodes", 100}}}}},
        {"training",
         {{"episodes", 300},
          {"warmup", 256},
          {"stage", "C1"},
          {"checkpoint_every", 100},
          {"demo_prefill", 0},
          {"demo_noise_amp", 0.1}}},
        {"eval", {{"trials", 100}}},
    };
}

namespace detail {

/// Strict recursive merge: every key in `user` must exist in `base`
/// (arrays and scalars replace wholesale).
inline void merge_strict(json& base, const json& user, const std::string& prefix) {
    if (!user.is_object()) throw ConfigError("config: expected object at '" + prefix + "'");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + path + "'");
        if (base[it.key()].is_object() && it.value().is_object())
            merge_strict(base[it.key()], it.value(), path);
        else
            base[it.key()] = it.value();
    }
}

}  // namespace detail

/// Applies a dotted-key override like "agent.discount=0.95". The value is
/// parsed as JSON, falling back to a plain string.
inline void apply_override(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("config: override must be key=value, got '" + assignment + "'");
    const std::string keypath = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    json* node = &cfg;
    std::size_t pos = 0;
    std::string walked;
    while (true) {
        const auto dot = keypath.find('.', pos);
        const std::string key = keypath.substr(pos, dot - pos);
        walked = walked.empty() ? key : walked + "." + key;
        if (!node->contains(key)) throw ConfigError("config: unknown key '" + walked + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

inline json resolve(const json& user_config, const std::vector<std::string>& overrides = {}) {
    json cfg = default_config();
    if (!user_config.is_null()) detail::merge_strict(cfg, user_config, "");
    for (const std::string& o : overrides) apply_override(cfg, o);
    return cfg;
}

inline json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw ConfigError("config: cannot open " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("config: parse failure in " + path + ": " + e.what());
    }
}

inline Vec3 to_vec3(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("config: expected 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline agents::AgentConfig agent_config(const json& cfg) {
    agents::AgentConfig a;
    const std::string algo = cfg.at("algorithm").get<std::string>();
    if (algo == "ddpg")
        a.algorithm = agents::Algorithm::Ddpg;
    else if (algo == "td3")
        a.algorithm = agents::Algorithm::Td3;
    else
        throw ConfigError("config: algorithm must be 'ddpg' or 'td3', got '" + algo + "'");
    const json& aj = cfg.at("agent");
    a.hidden_sizes = aj.at("hidden_sizes").get<std::vector<std::size_t>>();
    a.learning_rate = aj.at("learning_rate").get<double>();
    a.gradient_threshold = aj.at("gradient_threshold").get<double>();
    a.discount = aj.at("discount").get<double>();
    a.batch_size = aj.at("mini_batch_size").get<std::size_t>();
    a.buffer_capacity = aj.at("buffer_capacity").get<std::size_t>();
    a.target_smooth_factor = aj.at("target_smooth_factor").get<double>();
    a.epochs = aj.at("epochs").get<int>();
    a.max_minibatches_per_epoch = aj.at("max_minibatches_per_epoch").get<int>();
    a.policy_update_frequency = aj.at("policy_update_frequency").get<int>();
    a.target_update_frequency = aj.at("target_update_frequency").get<int>();
    a.exploration_stddev = aj.at("exploration_stddev").get<double>();
    a.ou_theta = aj.at("ou_mean_attraction").get<double>();
    a.ou_sigma = aj.at("ou_stddev").get<double>();
    a.noise_dt = cfg.at("physics").at("sample_time").get<double>();
    a.smoothing.stddev = aj.at("smoothing_stddev").get<double>();
    a.smoothing.stddev_min = aj.at("smoothing_stddev_min").get<double>();
    a.smoothing.clip = aj.at("smoothing_clip").get<double>();
    return a;
}

/// Base environment config (stage-independent fields); curriculum stages
/// overlay their features on top of this.
inline env::EnvConfig base_env_config(const json& cfg) {
    env::EnvConfig e;
    const json& pj = cfg.at("physics");
    e.physics.gravity = pj.at("gravity").get<double>();
    e.physics.timestep = pj.at("sample_time").get<double>();
    e.physics.attitude_time_constant = pj.at("attitude_time_constant").get<double>();
    e.initial_mass = pj.at("mass").get<double>();
    const json& dj = cfg.at("deposition");
    e.deposition.density = dj.at("density").get<double>();
    e.deposition.nozzle_diameter = dj.at("nozzle_diameter").get<double>();
    e.deposition.exit_velocity = dj.at("exit_velocity").get<double>();
    const json& wj = cfg.at("wind");
    e.wind.mean_force = to_vec3(wj.at("mean_force"));
    e.wind.gust_amplitude = to_vec3(wj.at("gust_amplitude"));
    const json& ej = cfg.at("env");
    e.episode.waypoint_advance_radius = ej.at("waypoint_advance_radius").get<double>();
    e.episode.terminal_velocity_threshold = ej.at("terminal_velocity_threshold").get<double>();
    e.episode.crash_height = ej.at("crash_height").get<double>();
    e.episode.out_of_bounds_distance = ej.at("out_of_bounds_distance").get<double>();
    e.episode.max_steps = ej.at("max_steps").get<int>();
    e.episode.reward_weight = ej.at("reward_weight").get<double>();
    e.fixed_start = to_vec3(ej.at("fixed_start"));
    e.start_box_min = to_vec3(ej.at("start_box_min"));
    e.start_box_max = to_vec3(ej.at("start_box_max"));
    e.waypoint_box_min = to_vec3(ej.at("waypoint_box_min"));
    e.waypoint_box_max = to_vec3(ej.at("waypoint_box_max"));
    return e;
}

inline curriculum::StageOptions stage_options(const json& cfg) {
    curriculum::StageOptions s;
    const json& cj = cfg.at("curriculum");
    s.waypoint_count = cj.at("waypoint_count").get<int>();
    s.completion_bonus = cj.at("completion_bonus").get<double>();
    s.deviation_penalty = cj.at("deviation_penalty").get<double>();
    s.mass_jitter = cj.at("mass_jitter").get<double>();
    s.base = base_env_config(cfg);
    s.noise_scale = cfg.at("env").at("noise_scale").get<double>();
    s.demo_prefill_steps = cfg.at("training").at("demo_prefill").get<int>();
    s.demo_noise_amp = cfg.at("training").at("demo_noise_amp").get<double>();
    s.wind.mean_force = to_vec3(cfg.at("wind").at("mean_force"));
    s.wind.gust_amplitude = to_vec3(cfg.at("wind").at("gust_amplitude"));
    return s;
}

inline curriculum::PromotionCriteria promotion_criteria(const json& cfg) {
    const json& pj = cfg.at("curriculum").at("promotion");
    curriculum::PromotionCriteria p;
    p.window = pj.at("window").get<int>();
    p.success_ratio = pj.at("success_ratio").get<double>();
    p.min_episodes = pj.at("min_episodes").get<int>();
    return p;
}

inline std::vector<curriculum::StageId> stage_list(const json& cfg) {
    std::vector<curriculum::StageId> out;
    for (const auto& s : cfg.at("curriculum").at("stages")) {
        const std::string name = s.get<std::string>();
        if (name == "C1") out.push_back(curriculum::StageId::C1);
        else if (name == "C2") out.push_back(curriculum::StageId::C2);
        else if (name == "C3") out.push_back(curriculum::StageId::C3);
        else if (name == "C4") out.push_back(curriculum::StageId::C4);
        else throw ConfigError("config: unknown curriculum stage '" + name + "'");
    }
    if (out.empty()) throw ConfigError("config: curriculum.stages must not be empty");
    return out;
}

inline curriculum::StageId parse_stage(const std::string& name) {
    if (name == "C1") return curriculum::StageId::C1;
    if (name == "C2") return curriculum::StageId::C2;
    if (name == "C3") return curriculum::StageId::C3;
    if (name == "C4") return curriculum::StageId::C4;
    throw ConfigError("config: unknown stage '" + name + "'");
}

}  // namespace amnav::config
