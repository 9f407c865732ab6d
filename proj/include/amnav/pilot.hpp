#pragma once

// Scripted proportional pilot and demonstration seeding for the replay
// buffer. Bounded roll/pitch commands mean almost the entire action cube
// maps to aggressive tilts that crash or exit the workspace, so uniform
// exploration essentially never finds the narrow corridor of stabilizing
// actions. Seeding the buffer with noisy runs of a hand-tuned proportional
// controller (in the spirit of demonstration-seeded DDPG) gives the critic
// examples of controlled flight to propagate value from.

#include <numbers>

#include "amnav/agents.hpp"
#include "amnav/env.hpp"

namespace amnav::pilot {

/// Proportional waypoint-tracking action computed from a normalized
/// observation. De-normalizes through the supplied statistics, then applies
/// altitude-rate thrust control around hover and small attitude commands
/// proportional to horizontal error and velocity. `mass` is the vehicle mass
/// assumed for the hover feed-forward term.
inline env::RawAction pd_action(const env::Observation& normalized, const env::Normalizer& norm,
                                double mass) {
    env::Observation raw;
    for (std::size_t i = 0; i < env::kObservationSize; ++i)
        raw[i] = normalized[i] * std::max(norm.stddev(i), env::Normalizer::kSigmaFloor) +
                 norm.mean(i);
    const double dx = raw[3], dy = raw[4], dz = raw[5];
    const double vx = raw[6], vy = raw[7], vz = raw[8];
    env::RawAction a;
    a.pitch = (0.25 * dx - 0.25 * vx) / (std::numbers::pi / 2.0);
    a.roll = (-0.25 * dy + 0.25 * vy) / (std::numbers::pi / 2.0);
    a.thrust = mass * (9.81 + 4.0 * dz - 3.0 * vz) / env::kMaxThrust * 2.0 - 1.0;
    return a.clamped();
}

/// Fills the replay buffer with `steps` transitions generated by the
/// proportional pilot plus uniform exploration noise of halfwidth
/// `noise_amp` on every action channel. Stored done flags follow the same
/// reward-variant rule as the training loop. The normalizer must already be
/// warmed (see agents::warm_normalizer); pilot rollouts continue to feed it.
inline void seed_replay(env::Environment& environment, const env::Normalizer& norm,
                        agents::ReplayBuffer& buffer, int steps, double noise_amp, Rng& rng) {
    const bool distance_reward =
        environment.config().reward_variant == env::RewardVariant::Distance;
    const double mass = environment.config().initial_mass;
    int stored = 0;
    while (stored < steps) {
        env::Observation obs = environment.reset(env::Environment::Mode::Train, rng);
        while (!environment.done()) {
            const env::RawAction base = pd_action(obs, norm, mass);
            const env::RawAction action =
                env::RawAction{base.roll + rng.uniform(-noise_amp, noise_amp),
                               base.pitch + rng.uniform(-noise_amp, noise_amp),
                               base.thrust + rng.uniform(-noise_amp, noise_amp)}
                    .clamped();
            const env::StepResult result = environment.step(action, rng);
            const bool done =
                distance_reward
                    ? result.status == env::TerminationStatus::Success
                    : result.status != env::TerminationStatus::Running &&
                          result.status != env::TerminationStatus::Timeout;
            buffer.push({obs, action, result.reward, result.observation, done});
            obs = result.observation;
            ++stored;
        }
    }
}

}  // namespace amnav::pilot
