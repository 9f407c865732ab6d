#pragma once

// Versioned JSON checkpoint: architecture, parameters, optimizer state,
// normalizer statistics, update counter, curriculum stage reached, and buffer
// occupancy. Doubles round-trip bit-exactly through nlohmann::json.

#include <fstream>
#include <string>

#include <json.hpp>

#include "amnav/agents.hpp"

namespace amnav::ckpt {

inline constexpr int kVersion = 1;

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline nlohmann::json network_to_json(const nn::DenseNetwork& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const nn::Layer& l : net.layers()) {
        layers.push_back({{"in", l.in},
                          {"out", l.out},
                          {"activation", static_cast<int>(l.act)},
                          {"weights", l.weights},
                          {"bias", l.bias}});
    }
    return layers;
}

inline nn::DenseNetwork network_from_json(const nlohmann::json& j) {
    nn::DenseNetwork net;
    for (const auto& lj : j) {
        nn::Layer l;
        l.in = lj.at("in").get<std::size_t>();
        l.out = lj.at("out").get<std::size_t>();
        l.act = static_cast<nn::Activation>(lj.at("activation").get<int>());
        l.weights = lj.at("weights").get<std::vector<double>>();
        l.bias = lj.at("bias").get<std::vector<double>>();
        if (l.weights.size() != l.in * l.out || l.bias.size() != l.out)
            throw CheckpointError("checkpoint: layer shape mismatch");
        net.layers().push_back(std::move(l));
    }
    return net;
}

inline nlohmann::json adam_to_json(const nn::AdamState& s) {
    return {{"learning_rate", s.learning_rate}, {"beta1", s.beta1},   {"beta2", s.beta2},
            {"epsilon", s.epsilon},             {"step", s.step_count}, {"m_weights", s.m_weights},
            {"v_weights", s.v_weights},         {"m_bias", s.m_bias}, {"v_bias", s.v_bias}};
}

inline nn::AdamState adam_from_json(const nlohmann::json& j) {
    nn::AdamState s;
    s.learning_rate = j.at("learning_rate").get<double>();
    s.beta1 = j.at("beta1").get<double>();
    s.beta2 = j.at("beta2").get<double>();
    s.epsilon = j.at("epsilon").get<double>();
    s.step_count = j.at("step").get<std::uint64_t>();
    s.m_weights = j.at("m_weights").get<std::vector<std::vector<double>>>();
    s.v_weights = j.at("v_weights").get<std::vector<std::vector<double>>>();
    s.m_bias = j.at("m_bias").get<std::vector<std::vector<double>>>();
    s.v_bias = j.at("v_bias").get<std::vector<std::vector<double>>>();
    return s;
}

}  // namespace detail

inline nlohmann::json agent_to_json(agents::Agent& agent, const std::string& stage_reached = "",
                                    std::uint64_t buffer_size = 0) {
    const agents::AgentConfig& c = agent.config();
    nlohmann::json j;
    j["version"] = kVersion;
    j["algorithm"] = agents::to_string(c.algorithm);
    j["config"] = {{"hidden_sizes", c.hidden_sizes},
                   {"learning_rate", c.learning_rate},
                   {"gradient_threshold", c.gradient_threshold},
                   {"discount", c.discount},
                   {"target_smooth_factor", c.target_smooth_factor},
                   {"batch_size", c.batch_size},
                   {"buffer_capacity", c.buffer_capacity},
                   {"policy_update_frequency", c.policy_update_frequency},
                   {"target_update_frequency", c.target_update_frequency},
                   {"epochs", c.epochs},
                   {"max_minibatches_per_epoch", c.max_minibatches_per_epoch},
                   {"exploration_stddev", c.exploration_stddev},
                   {"ou_theta", c.ou_theta},
                   {"ou_sigma", c.ou_sigma},
                   {"noise_dt", c.noise_dt},
                   {"smoothing_stddev", c.smoothing.stddev},
                   {"smoothing_stddev_min", c.smoothing.stddev_min},
                   {"smoothing_clip", c.smoothing.clip}};
    j["actor"] = detail::network_to_json(agent.actor());
    j["actor_target"] = detail::network_to_json(agent.actor_target());
    j["actor_opt"] = detail::adam_to_json(agent.actor_opt());
    j["critics"] = nlohmann::json::array();
    j["critic_targets"] = nlohmann::json::array();
    j["critic_opts"] = nlohmann::json::array();
    for (std::size_t i = 0; i < agent.critics().size(); ++i) {
        j["critics"].push_back(detail::network_to_json(agent.critics()[i]));
        j["critic_targets"].push_back(detail::network_to_json(agent.critic_targets()[i]));
        j["critic_opts"].push_back(detail::adam_to_json(agent.critic_opts()[i]));
    }
    j["update_index"] = agent.update_index();
    const env::Normalizer& norm = agent.normalizer();
    j["normalizer"] = {{"mean", norm.raw_mean()}, {"m2", norm.raw_m2()}, {"count", norm.count()}};
    j["stage_reached"] = stage_reached;
    j["buffer_size"] = buffer_size;
    return j;
}

inline void save(agents::Agent& agent, const std::string& path,
                 const std::string& stage_reached = "", std::uint64_t buffer_size = 0) {
    std::ofstream out(path);
    if (!out.good()) throw CheckpointError("checkpoint: cannot open for write: " + path);
    out << agent_to_json(agent, stage_reached, buffer_size).dump() << "\n";
    if (!out.good()) throw CheckpointError("checkpoint: write failed: " + path);
}

struct Loaded {
    agents::Agent agent;
    std::string stage_reached;
    std::uint64_t buffer_size = 0;
};

inline Loaded agent_from_json(const nlohmann::json& j) {
    if (!j.contains("version") || j.at("version").get<int>() != kVersion)
        throw CheckpointError("checkpoint: unsupported or missing version");
    agents::AgentConfig c;
    c.algorithm = j.at("algorithm").get<std::string>() == "ddpg" ? agents::Algorithm::Ddpg
                                                                 : agents::Algorithm::Td3;
    const auto& cj = j.at("config");
    c.hidden_sizes = cj.at("hidden_sizes").get<std::vector<std::size_t>>();
    c.learning_rate = cj.at("learning_rate").get<double>();
    c.gradient_threshold = cj.at("gradient_threshold").get<double>();
    c.discount = cj.at("discount").get<double>();
    c.target_smooth_factor = cj.at("target_smooth_factor").get<double>();
    c.batch_size = cj.at("batch_size").get<std::size_t>();
    c.buffer_capacity = cj.at("buffer_capacity").get<std::size_t>();
    c.policy_update_frequency = cj.at("policy_update_frequency").get<int>();
    c.target_update_frequency = cj.at("target_update_frequency").get<int>();
    c.epochs = cj.at("epochs").get<int>();
    c.max_minibatches_per_epoch = cj.at("max_minibatches_per_epoch").get<int>();
    c.exploration_stddev = cj.at("exploration_stddev").get<double>();
    c.ou_theta = cj.at("ou_theta").get<double>();
    c.ou_sigma = cj.at("ou_sigma").get<double>();
    c.noise_dt = cj.at("noise_dt").get<double>();
    c.smoothing.stddev = cj.at("smoothing_stddev").get<double>();
    c.smoothing.stddev_min = cj.at("smoothing_stddev_min").get<double>();
    c.smoothing.clip = cj.at("smoothing_clip").get<double>();

    Rng scratch(0);  // weights are overwritten below
    Loaded loaded{agents::Agent(c, scratch), "", 0};
    agents::Agent& a = loaded.agent;
    a.actor() = detail::network_from_json(j.at("actor"));
    a.actor_target() = detail::network_from_json(j.at("actor_target"));
    a.actor_opt() = detail::adam_from_json(j.at("actor_opt"));
    const auto& crit = j.at("critics");
    if (crit.size() != a.critics().size())
        throw CheckpointError("checkpoint: critic count does not match algorithm");
    for (std::size_t i = 0; i < a.critics().size(); ++i) {
        a.critics()[i] = detail::network_from_json(crit[i]);
        a.critic_targets()[i] = detail::network_from_json(j.at("critic_targets")[i]);
        a.critic_opts()[i] = detail::adam_from_json(j.at("critic_opts")[i]);
    }
    a.set_update_index(j.at("update_index").get<std::uint64_t>());
    const auto& nj = j.at("normalizer");
    env::Observation mean{}, m2{};
    const auto mv = nj.at("mean").get<std::vector<double>>();
    const auto m2v = nj.at("m2").get<std::vector<double>>();
    if (mv.size() != env::kObservationSize || m2v.size() != env::kObservationSize)
        throw CheckpointError("checkpoint: normalizer size mismatch");
    std::copy(mv.begin(), mv.end(), mean.begin());
    std::copy(m2v.begin(), m2v.end(), m2.begin());
    a.normalizer().restore(mean, m2, nj.at("count").get<std::uint64_t>());
    loaded.stage_reached = j.value("stage_reached", "");
    loaded.buffer_size = j.value("buffer_size", std::uint64_t{0});
    return loaded;
}

inline Loaded load(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw CheckpointError("checkpoint: cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("checkpoint: parse failure in " + path + ": " + e.what());
    }
    return agent_from_json(j);
}

}  // namespace amnav::ckpt
