#pragma once

// Curriculum stages C1-C4 and the staged training orchestrator. Stages only
// ever advance; the replay buffer persists across promotions.

#include <deque>
#include <string>
#include <vector>

#include "amnav/agents.hpp"
#include "amnav/env.hpp"
#include "amnav/pilot.hpp"

namespace amnav::curriculum {

enum class StageId { C1, C2, C3, C4 };

inline const char* to_string(StageId s) {
    switch (s) {
        case StageId::C1: return "C1";
        case StageId::C2: return "C2";
        case StageId::C3: return "C3";
        case StageId::C4: return "C4";
    }
    return "?";
}

/// Measurement noise at 1% of each component's working scale:
/// accelerations ~10 m/s^2, positions/height ~10 m, velocities ~5 m/s,
/// angles ~pi/2 rad.
inline env::Observation default_noise_halfwidth() {
    env::Observation h{};
    for (int i = 0; i < 3; ++i) h[i] = 0.1;        // accelerations
    for (int i = 3; i < 6; ++i) h[i] = 0.1;        // position deltas
    for (int i = 6; i < 9; ++i) h[i] = 0.05;       // velocities
    for (int i = 9; i < 12; ++i) h[i] = 0.0157;    // attitude
    h[12] = 0.1;                                   // height
    return h;
}

struct StageOptions {
    int waypoint_count = 2;          // stages C2-C4
    double completion_bonus = 10.0;
    double deviation_penalty = 0.1;  // stage C4
    double mass_jitter = 0.2;        // stage C3-C4 initial-mass spread
    double noise_scale = 1.0;        // multiplier on the default halfwidths
    int demo_prefill_steps = 0;      // pilot-demonstration transitions seeded
    double demo_noise_amp = 0.1;     // uniform noise on the pilot's actions
    dyn::WindModel wind{{0.1, 0.1, 0.0}, {0.2, 0.2, 0.2}};
    env::EnvConfig base{};           // physics, thresholds, workspace boxes
};

/// Environment parameter set for one stage. Each stage differs from its
/// predecessor only by the features it introduces:
///   C1: single static waypoint, fixed start, no noise, distance reward
///   C2: randomized start/targets, multi-waypoint, completion bonus, noise
///   C3: C2 + active deposition and initial-mass spread
///   C4: C3 + wind + deviation penalty
inline env::EnvConfig stage_config(StageId stage, const StageOptions& opts = {}) {
    env::EnvConfig c = opts.base;
    c.deposition.active = false;
    c.wind_enabled = false;
    c.deviation_penalty = 0.0;
    c.mass_jitter = 0.0;
    c.episode.noise_halfwidth = {};

    if (stage == StageId::C1) {
        c.reward_variant = env::RewardVariant::Distance;
        c.waypoint_count = 1;
        c.randomize_start = false;
        return c;
    }
    c.reward_variant = env::RewardVariant::Exponential;
    c.waypoint_count = opts.waypoint_count;
    c.randomize_start = true;
    c.completion_bonus = opts.completion_bonus;
    c.episode.noise_halfwidth = default_noise_halfwidth();
    for (double& h : c.episode.noise_halfwidth) h *= opts.noise_scale;
    if (stage == StageId::C2) return c;

    c.deposition.active = true;
    c.mass_jitter = opts.mass_jitter;
    if (stage == StageId::C3) return c;

    c.wind = opts.wind;
    c.wind_enabled = true;
    c.deviation_penalty = opts.deviation_penalty;
    return c;
}

struct PromotionCriteria {
    int window = 50;           // rolling episode window
    double success_ratio = 0.8;
    int min_episodes = 100;    // per stage
};

/// True iff the stage has run long enough and the rolling success ratio over
/// the most recent `window` episodes clears the threshold.
inline bool should_promote(const std::deque<bool>& recent_outcomes, int episodes_in_stage,
                           const PromotionCriteria& criteria) {
    if (episodes_in_stage < criteria.min_episodes) return false;
    if (recent_outcomes.empty()) return false;
    int successes = 0;
    for (bool b : recent_outcomes) successes += b ? 1 : 0;
    return static_cast<double>(successes) / static_cast<double>(recent_outcomes.size()) >=
           criteria.success_ratio;
}

struct StageEvent {
    StageId stage;
    int global_episode;  // episode index at which the stage began
};

struct CurriculumResult {
    std::vector<agents::EpisodeLog> episodes;
    std::vector<StageEvent> stage_events;
    StageId final_stage = StageId::C1;
};

/// Trains one agent through the given (ordered) stages, promoting when the
/// criteria fire, stopping at the episode budget or when the final stage's
/// criteria are satisfied. The buffer is shared across all stages.
inline CurriculumResult curriculum_train(agents::Agent& agent, agents::ReplayBuffer& buffer,
                                         const std::vector<StageId>& stages,
                                         const StageOptions& opts,
                                         const PromotionCriteria& criteria, int episode_budget,
                                         Rng& rng) {
    expects(!stages.empty(), "curriculum_train: at least one stage required");
    CurriculumResult result;
    int global_episode = 0;
    for (std::size_t si = 0; si < stages.size(); ++si) {
        const StageId stage = stages[si];
        result.stage_events.push_back({stage, global_episode});
        result.final_stage = stage;
        env::Environment environment(stage_config(stage, opts), &agent.normalizer());
        if (si == 0) {
            agents::warm_normalizer(environment, agent.normalizer(), rng);
            if (opts.demo_prefill_steps > 0)
                pilot::seed_replay(environment, agent.normalizer(), buffer,
                                   opts.demo_prefill_steps, opts.demo_noise_amp, rng);
        }
        std::deque<bool> recent;
        int in_stage = 0;
        while (global_episode < episode_budget) {
            agents::TrainOptions one{.episodes = 1};
            auto logs = train_loop(agent, environment, buffer, one, rng, to_string(stage));
            auto& log = logs.front();
            log.episode = global_episode;
            recent.push_back(log.status == env::TerminationStatus::Success);
            if (static_cast<int>(recent.size()) > criteria.window) recent.pop_front();
            result.episodes.push_back(log);
            global_episode += 1;
            in_stage += 1;
            if (should_promote(recent, in_stage, criteria)) break;
        }
        if (global_episode >= episode_budget) break;
    }
    return result;
}

}  // namespace amnav::curriculum
