#pragma once

// DDPG and TD3 actor-critic agents over the dense-network engine: uniform
// replay, exploration noise (Gaussian for DDPG, Ornstein-Uhlenbeck for TD3),
// twin-critic min targets with target-policy smoothing, soft target updates,
// and an episode-boundary training loop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "amnav/core.hpp"
#include "amnav/env.hpp"
#include "amnav/nn.hpp"

namespace amnav::agents {

struct Transition {
    env::Observation state{};      // normalized
    env::RawAction action{};
    double reward = 0.0;
    env::Observation next_state{}; // normalized
    bool done = false;
};

/// Fixed-capacity ring buffer, FIFO eviction, uniform sampling with
/// replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        expects(capacity > 0, "ReplayBuffer: capacity must be positive");
    }

    void push(const Transition& t) {
        if (storage_.size() < capacity_) {
            storage_.push_back(t);
        } else {
            storage_[cursor_] = t;
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    std::vector<Transition> sample(std::size_t n, Rng& rng) const {
        expects(size() >= n, "ReplayBuffer::sample: not enough stored transitions");
        std::vector<Transition> batch;
        batch.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            batch.push_back(storage_[rng.integer(storage_.size())]);
        return batch;
    }

    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return storage_[i]; }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> storage_;
};

/// Mean-reverting exploration noise, one component per action dimension.
class OUNoise {
public:
    OUNoise(double theta = 1.0, double sigma = 0.1) : theta_(theta), sigma_(sigma) {}

    void reset() { state_ = {0.0, 0.0, 0.0}; }

    std::array<double, 3> step(double dt, Rng& rng) {
        const double diffusion = sigma_ * std::sqrt(dt);
        for (double& x : state_)
            x += theta_ * (0.0 - x) * dt + diffusion * rng.normal();
        return state_;
    }

    const std::array<double, 3>& state() const { return state_; }

private:
    double theta_;
    double sigma_;
    std::array<double, 3> state_{};
};

/// Target-policy smoothing noise parameters (TD3).
struct SmoothingPolicy {
    double stddev = 0.05;
    double stddev_min = 0.05;
    double clip = 0.5;

    double draw(Rng& rng) const {
        const double s = std::max(stddev, stddev_min);
        return std::clamp(rng.normal(0.0, s), -clip, clip);
    }
};

enum class Algorithm { Ddpg, Td3 };

inline const char* to_string(Algorithm a) { return a == Algorithm::Ddpg ? "ddpg" : "td3"; }

struct AgentConfig {
    Algorithm algorithm = Algorithm::Td3;
    std::vector<std::size_t> hidden_sizes{400, 300};
    double learning_rate = 1e-3;
    double gradient_threshold = 1.0;
    double discount = 0.99;          // gamma
    double target_smooth_factor = 5e-3;  // tau
    std::size_t batch_size = 256;
    std::size_t buffer_capacity = 1'000'000;
    int policy_update_frequency = 1;
    int target_update_frequency = 1;
    int epochs = 3;
    int max_minibatches_per_epoch = 100;
    double exploration_stddev = 0.1;   // Gaussian (DDPG)
    double ou_theta = 1.0;             // Ornstein-Uhlenbeck (TD3)
    double ou_sigma = 0.1;
    double noise_dt = 0.01;
    SmoothingPolicy smoothing{};
};

inline std::vector<double> to_vector(const env::Observation& o) {
    return std::vector<double>(o.begin(), o.end());
}

inline std::vector<double> critic_input(const env::Observation& s, const env::RawAction& a) {
    std::vector<double> x(s.begin(), s.end());
    x.push_back(a.roll);
    x.push_back(a.pitch);
    x.push_back(a.thrust);
    return x;
}

class Agent {
public:
    Agent(AgentConfig config, Rng& rng) : config_(std::move(config)) {
        std::vector<std::size_t> actor_sizes{env::kObservationSize};
        std::vector<nn::Activation> actor_acts;
        for (std::size_t h : config_.hidden_sizes) {
            actor_sizes.push_back(h);
            actor_acts.push_back(nn::Activation::ReLU);
        }
        actor_sizes.push_back(3);
        actor_acts.push_back(nn::Activation::Tanh);

        std::vector<std::size_t> critic_sizes{env::kObservationSize + 3};
        std::vector<nn::Activation> critic_acts;
        for (std::size_t h : config_.hidden_sizes) {
            critic_sizes.push_back(h);
            critic_acts.push_back(nn::Activation::ReLU);
        }
        critic_sizes.push_back(1);
        critic_acts.push_back(nn::Activation::Identity);

        actor_ = nn::DenseNetwork(actor_sizes, actor_acts, rng);
        actor_target_ = actor_;
        actor_opt_ = nn::AdamState::for_network(actor_, config_.learning_rate);
        const int n_critics = config_.algorithm == Algorithm::Td3 ? 2 : 1;
        for (int i = 0; i < n_critics; ++i) {
            critics_.emplace_back(critic_sizes, critic_acts, rng);
            critic_targets_.push_back(critics_.back());
            critic_opts_.push_back(nn::AdamState::for_network(critics_.back(), config_.learning_rate));
        }
        ou_ = OUNoise(config_.ou_theta, config_.ou_sigma);
    }

    const AgentConfig& config() const { return config_; }
    env::Normalizer& normalizer() { return normalizer_; }
    const env::Normalizer& normalizer() const { return normalizer_; }
    nn::DenseNetwork& actor() { return actor_; }
    nn::DenseNetwork& actor_target() { return actor_target_; }
    std::vector<nn::DenseNetwork>& critics() { return critics_; }
    std::vector<nn::DenseNetwork>& critic_targets() { return critic_targets_; }
    nn::AdamState& actor_opt() { return actor_opt_; }
    std::vector<nn::AdamState>& critic_opts() { return critic_opts_; }

    void reset_episode_noise() { ou_.reset(); }

    env::RawAction select_action(const env::Observation& obs, bool explore, Rng& rng) {
        const std::vector<double> out = nn::forward(actor_, to_vector(obs));
        env::RawAction a{out[0], out[1], out[2]};
        if (explore) {
            if (config_.algorithm == Algorithm::Ddpg) {
                a.roll += rng.normal(0.0, config_.exploration_stddev);
                a.pitch += rng.normal(0.0, config_.exploration_stddev);
                a.thrust += rng.normal(0.0, config_.exploration_stddev);
            } else {
                const auto n = ou_.step(config_.noise_dt, rng);
                a.roll += n[0];
                a.pitch += n[1];
                a.thrust += n[2];
            }
        }
        return a.clamped();
    }

    double critic_value(std::size_t which, const env::Observation& s, const env::RawAction& a) const {
        return nn::forward(critics_[which], critic_input(s, a))[0];
    }

    /// TD3 bootstrap targets: smoothed target-actor action, min over the two
    /// target critics, terminal cut on done.
    std::vector<double> td3_targets(const std::vector<Transition>& batch, Rng& rng) const {
        expects(config_.algorithm == Algorithm::Td3, "td3_targets: TD3 agents only");
        std::vector<double> y(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const Transition& t = batch[i];
            if (t.done) {
                y[i] = t.reward;
                continue;
            }
            const auto next_action = smoothed_target_action(t.next_state, rng);
            const double q1 = nn::forward(critic_targets_[0], critic_input(t.next_state, next_action))[0];
            const double q2 = nn::forward(critic_targets_[1], critic_input(t.next_state, next_action))[0];
            y[i] = t.reward + config_.discount * std::min(q1, q2);
        }
        return y;
    }

    env::RawAction smoothed_target_action(const env::Observation& next_state, Rng& rng) const {
        const auto out = nn::forward(actor_target_, to_vector(next_state));
        env::RawAction a{out[0] + config_.smoothing.draw(rng),
                         out[1] + config_.smoothing.draw(rng),
                         out[2] + config_.smoothing.draw(rng)};
        return a.clamped();
    }

    struct UpdateLosses {
        double critic_loss = 0.0;   // critic 1 (DDPG's only critic)
        double critic2_loss = 0.0;  // TD3 only
        double actor_loss = 0.0;    // -mean Q, when the actor updated
        bool actor_updated = false;
    };

    UpdateLosses update(const std::vector<Transition>& batch, Rng& rng) {
        expects(!batch.empty(), "Agent::update: empty batch");
        update_index_ += 1;
        UpdateLosses losses;

        std::vector<double> targets(batch.size());
        if (config_.algorithm == Algorithm::Td3) {
            targets = td3_targets(batch, rng);
        } else {
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const Transition& t = batch[i];
                if (t.done) {
                    targets[i] = t.reward;
                } else {
                    const auto out = nn::forward(actor_target_, to_vector(t.next_state));
                    const env::RawAction na{out[0], out[1], out[2]};
                    const double q = nn::forward(critic_targets_[0], critic_input(t.next_state, na))[0];
                    targets[i] = t.reward + config_.discount * q;
                }
            }
        }

        for (std::size_t c = 0; c < critics_.size(); ++c) {
            const double loss = critic_regression_step(c, batch, targets);
            (c == 0 ? losses.critic_loss : losses.critic2_loss) = loss;
        }

        if (update_index_ % config_.policy_update_frequency == 0) {
            losses.actor_loss = actor_ascent_step(batch);
            losses.actor_updated = true;
        }
        if (update_index_ % config_.target_update_frequency == 0) {
            nn::soft_update(actor_target_, actor_, config_.target_smooth_factor);
            for (std::size_t c = 0; c < critics_.size(); ++c)
                nn::soft_update(critic_targets_[c], critics_[c], config_.target_smooth_factor);
        }
        return losses;
    }

    std::uint64_t update_index() const { return update_index_; }
    void set_update_index(std::uint64_t v) { update_index_ = v; }

private:
    /// One MSE regression step of critic `c` toward `targets`; returns the loss.
    double critic_regression_step(std::size_t c, const std::vector<Transition>& batch,
                                  const std::vector<double>& targets) {
        nn::GradientSet grads = nn::GradientSet::zeros_like(critics_[c]);
        double loss = 0.0;
        const double inv_n = 1.0 / static_cast<double>(batch.size());
        nn::ForwardCache cache;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto x = critic_input(batch[i].state, batch[i].action);
            const double q = nn::forward(critics_[c], x, &cache)[0];
            const double err = q - targets[i];
            loss += err * err * inv_n;
            grads.accumulate(nn::backward(critics_[c], cache, {2.0 * err * inv_n}));
        }
        nn::clip_gradients(grads, config_.gradient_threshold);
        nn::adam_step(critics_[c], grads, critic_opts_[c]);
        return loss;
    }

    /// Deterministic policy gradient through critic 1; returns -mean Q.
    double actor_ascent_step(const std::vector<Transition>& batch) {
        nn::GradientSet grads = nn::GradientSet::zeros_like(actor_);
        double mean_q = 0.0;
        const double inv_n = 1.0 / static_cast<double>(batch.size());
        nn::ForwardCache actor_cache, critic_cache;
        for (const Transition& t : batch) {
            const auto s = to_vector(t.state);
            const auto a = nn::forward(actor_, s, &actor_cache);
            auto x = s;
            x.insert(x.end(), a.begin(), a.end());
            const double q = nn::forward(critics_[0], x, &critic_cache)[0];
            mean_q += q * inv_n;
            std::vector<double> dx;
            nn::backward(critics_[0], critic_cache, {-inv_n}, &dx);  // d(-Q)/d input
            const std::vector<double> da(dx.end() - 3, dx.end());
            grads.accumulate(nn::backward(actor_, actor_cache, da));
        }
        nn::clip_gradients(grads, config_.gradient_threshold);
        nn::adam_step(actor_, grads, actor_opt_);
        return -mean_q;
    }

    AgentConfig config_;
    nn::DenseNetwork actor_, actor_target_;
    std::vector<nn::DenseNetwork> critics_, critic_targets_;
    nn::AdamState actor_opt_;
    std::vector<nn::AdamState> critic_opts_;
    env::Normalizer normalizer_;
    OUNoise ou_{};
    std::uint64_t update_index_ = 0;
};

struct EpisodeLog {
    int episode = 0;
    double cumulative_reward = 0.0;
    int steps = 0;
    env::TerminationStatus status = env::TerminationStatus::Running;
    std::string stage;  // empty outside curriculum runs
};

struct TrainOptions {
    int episodes = 300;
    bool learning_enabled = true;
    std::size_t warmup = 256;  // transitions required before any update
};

/// Burn in the observation normalizer before any transition is stored:
/// rolls out uniform-random-action episodes in training mode (which feeds
/// the Welford statistics) until at least `min_samples` observations have
/// been seen. Without this, the first stored transitions are scaled by
/// near-degenerate statistics (sigma at the floor) and poison the replay
/// buffer with astronomically large inputs.
inline void warm_normalizer(env::Environment& environment, const env::Normalizer& normalizer,
                            Rng& rng, std::size_t min_samples = 1000) {
    while (normalizer.count() < min_samples) {
        environment.reset(env::Environment::Mode::Train, rng);
        while (!environment.done()) {
            const env::RawAction a{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                   rng.uniform(-1.0, 1.0)};
            environment.step(a, rng);
        }
    }
}

/// Episode-boundary training: roll out with exploration, then run up to
/// epochs x minibatches optimizer steps from the replay buffer.
inline std::vector<EpisodeLog> train_loop(Agent& agent, env::Environment& environment,
                                          ReplayBuffer& buffer, const TrainOptions& options,
                                          Rng& rng, const std::string& stage_label = "") {
    std::vector<EpisodeLog> logs;
    const AgentConfig& cfg = agent.config();
    for (int ep = 0; ep < options.episodes; ++ep) {
        agent.reset_episode_noise();
        env::Observation obs = environment.reset(env::Environment::Mode::Train, rng);
        EpisodeLog log;
        log.episode = ep;
        log.stage = stage_label;
        // Under the negative distance reward, a terminal cut (y = r) makes any
        // early exit -- crash, out-of-bounds -- a reward shortcut, so failure
        // terminals bootstrap (done = false) and only Success cuts the value.
        // Under the positive exponential reward the cut itself is the penalty,
        // so every true terminal is stored with done = true.
        const bool distance_reward =
            environment.config().reward_variant == env::RewardVariant::Distance;
        while (!environment.done()) {
            const env::RawAction action = agent.select_action(obs, /*explore=*/true, rng);
            const env::StepResult result = environment.step(action, rng);
            const bool done =
                distance_reward
                    ? result.status == env::TerminationStatus::Success
                    : result.status != env::TerminationStatus::Running &&
                          result.status != env::TerminationStatus::Timeout;
            buffer.push({obs, action, result.reward, result.observation, done});
            obs = result.observation;
            log.cumulative_reward += result.reward;
            log.steps += 1;
        }
        log.status = environment.status();

        if (options.learning_enabled && buffer.size() >= std::max(options.warmup, cfg.batch_size)) {
            for (int epoch = 0; epoch < cfg.epochs; ++epoch)
                for (int mb = 0; mb < cfg.max_minibatches_per_epoch; ++mb)
                    agent.update(buffer.sample(cfg.batch_size, rng), rng);
        }
        logs.push_back(log);
    }
    return logs;
}

}  // namespace amnav::agents
