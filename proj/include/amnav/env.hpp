#pragma once

// MDP environment over the flight model: 13-component observation assembly,
// z-score normalization, action scaling, waypoint sequencing, rewards, and
// termination. One instance per owner; pair instances with independent RNG
// streams for parallel rollouts.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "amnav/core.hpp"
#include "amnav/dynamics.hpp"

namespace amnav::env {

inline constexpr std::size_t kObservationSize = 13;
using Observation = std::array<double, kObservationSize>;

/// Observation component order: ax ay az, dx dy dz, vx vy vz, roll pitch yaw, z.
inline Observation assemble_observation(const dyn::DroneState& state, const Vec3& target) {
    const Vec3 delta = target - state.position;
    return {state.acceleration[0], state.acceleration[1], state.acceleration[2],
            delta[0], delta[1], delta[2],
            state.velocity[0], state.velocity[1], state.velocity[2],
            state.roll, state.pitch, state.yaw,
            state.position[2]};
}

/// Agent action in [-1,1]^3: roll, pitch, thrust.
struct RawAction {
    double roll = 0.0;
    double pitch = 0.0;
    double thrust = 0.0;

    RawAction clamped() const {
        return {std::clamp(roll, -1.0, 1.0), std::clamp(pitch, -1.0, 1.0),
                std::clamp(thrust, -1.0, 1.0)};
    }
};

inline constexpr double kMaxThrust = 10.0;  // N

/// Affine map [-1,1]^3 -> roll/pitch in +-pi/2, thrust in [0, 10] N.
inline dyn::ScaledAction scale_action(const RawAction& raw) {
    const RawAction a = raw.clamped();
    return {a.roll * std::numbers::pi / 2.0, a.pitch * std::numbers::pi / 2.0,
            (a.thrust + 1.0) / 2.0 * kMaxThrust};
}

inline RawAction unscale_action(const dyn::ScaledAction& s) {
    return {s.roll / (std::numbers::pi / 2.0), s.pitch / (std::numbers::pi / 2.0),
            s.thrust / kMaxThrust * 2.0 - 1.0};
}

/// Online z-score statistics (Welford). Frozen during evaluation; updating a
/// frozen normalizer is a contract violation.
class Normalizer {
public:
    static constexpr double kSigmaFloor = 1e-6;

    void update(const Observation& obs) {
        expects(!frozen_, "Normalizer::update called while frozen (evaluation mode)");
        count_ += 1;
        for (std::size_t i = 0; i < kObservationSize; ++i) {
            const double delta = obs[i] - mean_[i];
            mean_[i] += delta / static_cast<double>(count_);
            m2_[i] += delta * (obs[i] - mean_[i]);
        }
    }

    Observation normalize(const Observation& obs) const {
        expects(count_ >= 1, "Normalizer::normalize requires at least one sample");
        Observation out;
        for (std::size_t i = 0; i < kObservationSize; ++i)
            out[i] = (obs[i] - mean_[i]) / std::max(stddev(i), kSigmaFloor);
        return out;
    }

    double mean(std::size_t i) const { return mean_[i]; }
    double stddev(std::size_t i) const {
        if (count_ < 2) return 0.0;
        return std::sqrt(m2_[i] / static_cast<double>(count_));
    }
    std::uint64_t count() const { return count_; }
    bool frozen() const { return frozen_; }
    void freeze() { frozen_ = true; }
    void thaw() { frozen_ = false; }

    // checkpoint plumbing
    const Observation& raw_mean() const { return mean_; }
    const Observation& raw_m2() const { return m2_; }
    void restore(const Observation& mean, const Observation& m2, std::uint64_t count) {
        mean_ = mean;
        m2_ = m2;
        count_ = count;
    }

private:
    Observation mean_{};
    Observation m2_{};
    std::uint64_t count_ = 0;
    bool frozen_ = false;
};

enum class RewardVariant { Distance, Exponential };  // stage C1 vs C2-C4

/// w_p * exp(-||p - target||^2)
inline double reward_exp(const Vec3& position, const Vec3& target, double weight) {
    expects(weight > 0.0, "reward_exp: weight must be positive");
    return weight * std::exp(-squared_norm(position - target));
}

/// -||target - p||
inline double reward_distance(const Vec3& position, const Vec3& target) {
    return -norm(target - position);
}

enum class TerminationStatus { Running, Success, Crash, OutOfBounds, Timeout };

inline const char* to_string(TerminationStatus s) {
    switch (s) {
        case TerminationStatus::Running: return "Running";
        case TerminationStatus::Success: return "Success";
        case TerminationStatus::Crash: return "Crash";
        case TerminationStatus::OutOfBounds: return "OutOfBounds";
        case TerminationStatus::Timeout: return "Timeout";
    }
    return "?";
}

struct EpisodeConfig {
    double waypoint_advance_radius = 0.1;     // m
    double terminal_velocity_threshold = 0.1; // m/s
    double crash_height = 0.1;                // m
    double out_of_bounds_distance = 10.0;     // m, from the active target
    int max_steps = 2000;
    double reward_weight = 1.0;               // w_p in the exponential reward
    Observation noise_halfwidth{};            // uniform measurement noise, per component
};

/// Precedence: Crash > OutOfBounds > Success > Timeout.
inline TerminationStatus check_termination(const dyn::DroneState& state, const Vec3& target,
                                           const EpisodeConfig& config, int step_count,
                                           bool last_waypoint) {
    if (state.position[2] < config.crash_height) return TerminationStatus::Crash;
    if (norm(state.position - target) > config.out_of_bounds_distance)
        return TerminationStatus::OutOfBounds;
    if (last_waypoint && norm(state.position - target) <= config.waypoint_advance_radius &&
        norm(state.velocity) < config.terminal_velocity_threshold)
        return TerminationStatus::Success;
    if (step_count >= config.max_steps) return TerminationStatus::Timeout;
    return TerminationStatus::Running;
}

/// Everything that defines one environment variant. Curriculum stages and the
/// CLI produce these; the environment consumes them unchanged.
struct EnvConfig {
    dyn::PhysicsParams physics{};
    dyn::DepositionModel deposition{};
    dyn::WindModel wind{};
    bool wind_enabled = false;
    EpisodeConfig episode{};
    RewardVariant reward_variant = RewardVariant::Exponential;
    double completion_bonus = 10.0;   // added when an intermediate waypoint is reached
    double deviation_penalty = 0.0;   // per-step distance penalty coefficient (stage C4)

    int waypoint_count = 1;
    std::vector<Vec3> fixed_waypoints;  // non-empty: used verbatim, no sampling
    Vec3 waypoint_box_min{-5.0, -5.0, 0.5};
    Vec3 waypoint_box_max{5.0, 5.0, 5.0};

    bool randomize_start = false;       // training-mode start sampling
    Vec3 fixed_start{0.0, 0.0, 1.5};
    Vec3 start_box_min{-5.0, -5.0, 0.5};
    Vec3 start_box_max{5.0, 5.0, 5.0};

    double initial_mass = 0.7;          // kg
    double mass_jitter = 0.0;           // +- fraction applied at reset (stage C3)
    bool mask_acceleration = false;     // zero components 0..2 (observation ablation)
};

struct StepResult {
    Observation observation{};  // normalized
    double reward = 0.0;
    TerminationStatus status = TerminationStatus::Running;
};

class Environment {
public:
    enum class Mode { Train, Eval };

    Environment(EnvConfig config, Normalizer* normalizer)
        : config_(std::move(config)), normalizer_(normalizer) {
        expects(normalizer_ != nullptr, "Environment requires a normalizer");
    }

    const EnvConfig& config() const { return config_; }
    const dyn::DroneState& state() const { return state_; }
    const std::vector<Vec3>& waypoints() const { return waypoints_; }
    std::size_t waypoint_index() const { return waypoint_index_; }
    const Vec3& active_target() const { return waypoints_[waypoint_index_]; }
    int step_count() const { return step_count_; }
    TerminationStatus status() const { return status_; }
    bool done() const { return status_ != TerminationStatus::Running; }
    Mode mode() const { return mode_; }

    Observation reset(Mode mode, Rng& rng) {
        mode_ = mode;
        state_ = dyn::DroneState{};
        state_.mass = config_.initial_mass;
        if (config_.mass_jitter > 0.0)
            state_.mass *= 1.0 + rng.uniform(-config_.mass_jitter, config_.mass_jitter);
        physics_ = config_.physics;
        physics_.min_mass = state_.mass * 0.5;

        if (mode == Mode::Train && config_.randomize_start)
            state_.position = sample_box(config_.start_box_min, config_.start_box_max, rng);
        else
            state_.position = config_.fixed_start;

        waypoints_.clear();
        if (!config_.fixed_waypoints.empty()) {
            waypoints_ = config_.fixed_waypoints;
        } else {
            for (int i = 0; i < config_.waypoint_count; ++i)
                waypoints_.push_back(
                    sample_box(config_.waypoint_box_min, config_.waypoint_box_max, rng));
        }
        waypoint_index_ = 0;
        step_count_ = 0;
        status_ = TerminationStatus::Running;
        return observe(rng);
    }

    StepResult step(const RawAction& raw_action, Rng& rng) {
        expects(!done(), "Environment::step on a terminated episode");
        const dyn::ScaledAction action = scale_action(raw_action);
        state_ = dyn::step(state_, action, physics_, config_.deposition,
                           config_.wind_enabled ? &config_.wind : nullptr, &rng);
        step_count_ += 1;

        double reward = 0.0;
        // intermediate waypoint completion
        if (waypoint_index_ + 1 < waypoints_.size() &&
            norm(state_.position - active_target()) <= config_.episode.waypoint_advance_radius) {
            waypoint_index_ += 1;
            reward += config_.completion_bonus;
        }

        const Vec3& target = active_target();
        if (config_.reward_variant == RewardVariant::Distance)
            reward += reward_distance(state_.position, target);
        else
            reward += reward_exp(state_.position, target, config_.episode.reward_weight);
        if (config_.deviation_penalty > 0.0)
            reward -= config_.deviation_penalty * norm(state_.position - target);

        status_ = check_termination(state_, target, config_.episode, step_count_,
                                    waypoint_index_ + 1 == waypoints_.size());
        return {observe(rng), reward, status_};
    }

    /// Raw (unnormalized, noisy) observation of the current state.
    Observation observe_raw(Rng& rng) const {
        Observation obs = assemble_observation(state_, active_target());
        for (std::size_t i = 0; i < kObservationSize; ++i) {
            const double h = config_.episode.noise_halfwidth[i];
            if (h > 0.0) obs[i] += rng.uniform(-h, h);
        }
        if (config_.mask_acceleration)
            obs[0] = obs[1] = obs[2] = 0.0;
        return obs;
    }

private:
    Observation observe(Rng& rng) {
        const Observation raw = observe_raw(rng);
        if (mode_ == Mode::Train && !normalizer_->frozen()) normalizer_->update(raw);
        return normalizer_->normalize(raw);
    }

    static Vec3 sample_box(const Vec3& lo, const Vec3& hi, Rng& rng) {
        Vec3 p;
        for (int i = 0; i < 3; ++i)
            p[i] = lo[i] == hi[i] ? lo[i] : rng.uniform(lo[i], hi[i]);
        return p;
    }

    EnvConfig config_;
    dyn::PhysicsParams physics_{};
    Normalizer* normalizer_;
    Mode mode_ = Mode::Train;
    dyn::DroneState state_{};
    std::vector<Vec3> waypoints_{{0.0, 0.0, 2.0}};
    std::size_t waypoint_index_ = 0;
    int step_count_ = 0;
    TerminationStatus status_ = TerminationStatus::Running;
};

}  // namespace amnav::env
