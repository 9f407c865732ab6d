#include <doctest.h>

#include "amnav/curriculum.hpp"

using namespace amnav;
using curriculum::StageId;

TEST_CASE("stage configs introduce exactly the advertised features") {
    curriculum::StageOptions opts;
    const auto c1 = curriculum::stage_config(StageId::C1, opts);
    CHECK(c1.reward_variant == env::RewardVariant::Distance);
    CHECK(c1.waypoint_count == 1);
    CHECK(!c1.randomize_start);
    CHECK(!c1.deposition.active);
    CHECK(!c1.wind_enabled);
    for (double h : c1.episode.noise_halfwidth) CHECK(h == 0.0);

    const auto c2 = curriculum::stage_config(StageId::C2, opts);
    CHECK(c2.reward_variant == env::RewardVariant::Exponential);
    CHECK(c2.randomize_start);
    CHECK(c2.waypoint_count == opts.waypoint_count);
    CHECK(!c2.deposition.active);
    bool any_noise = false;
    for (double h : c2.episode.noise_halfwidth) any_noise = any_noise || h > 0.0;
    CHECK(any_noise);

    const auto c3 = curriculum::stage_config(StageId::C3, opts);
    CHECK(c3.deposition.active);
    CHECK(c3.deposition.density == 1700.0);
    CHECK(c3.deposition.nozzle_diameter == 0.008);
    CHECK(c3.deposition.exit_velocity == 0.5);
    CHECK(c3.mass_jitter == opts.mass_jitter);
    CHECK(!c3.wind_enabled);

    const auto c4 = curriculum::stage_config(StageId::C4, opts);
    CHECK(c4.wind_enabled);
    CHECK(c4.deviation_penalty == opts.deviation_penalty);

    // nesting: C4 minus wind and penalty equals C3
    auto c4_stripped = c4;
    c4_stripped.wind_enabled = false;
    c4_stripped.wind = c3.wind;
    c4_stripped.deviation_penalty = 0.0;
    CHECK(c4_stripped.deposition.active == c3.deposition.active);
    CHECK(c4_stripped.mass_jitter == c3.mass_jitter);
    CHECK(c4_stripped.episode.noise_halfwidth == c3.episode.noise_halfwidth);
    CHECK(c4_stripped.waypoint_count == c3.waypoint_count);
    CHECK(c4_stripped.reward_variant == c3.reward_variant);
}

TEST_CASE("promotion rule") {
    curriculum::PromotionCriteria crit;
    crit.window = 100;
    crit.success_ratio = 0.8;
    crit.min_episodes = 100;

    std::deque<bool> window;
    for (int i = 0; i < 100; ++i) window.push_back(i < 90);  // 90/100 successes
    CHECK(curriculum::should_promote(window, 150, crit));
    CHECK(!curriculum::should_promote(window, 50, crit));  // below the minimum

    crit.success_ratio = 1.0;
    window[0] = false;
    CHECK(!curriculum::should_promote(window, 150, crit));
}

namespace {

curriculum::StageOptions fast_options() {
    curriculum::StageOptions opts;
    opts.base.episode.max_steps = 20;
    opts.base.fixed_start = {0.0, 0.0, 1.5};
    opts.base.waypoint_box_min = {-0.5, -0.5, 1.5};
    opts.base.waypoint_box_max = {0.5, 0.5, 2.5};
    opts.base.start_box_min = {-0.5, -0.5, 1.0};
    opts.base.start_box_max = {0.5, 0.5, 2.0};
    return opts;
}

agents::AgentConfig fast_agent_config() {
    agents::AgentConfig c;
    c.hidden_sizes = {8};
    c.batch_size = 8;
    c.epochs = 1;
    c.max_minibatches_per_epoch = 2;
    return c;
}

}  // namespace

TEST_CASE("forced promotion walks all stages; stage sequence is sorted") {
    Rng rng(21);
    agents::Agent agent(fast_agent_config(), rng);
    agents::ReplayBuffer buffer(10000);
    curriculum::PromotionCriteria crit;
    crit.window = 1;
    crit.success_ratio = 0.0;
    crit.min_episodes = 1;
    const std::vector<StageId> stages{StageId::C1, StageId::C2, StageId::C3, StageId::C4};
    const auto result = curriculum::curriculum_train(agent, buffer, stages, fast_options(), crit,
                                                     100, rng);
    CHECK(result.final_stage == StageId::C4);
    CHECK(result.stage_events.size() == 4);
    for (std::size_t i = 1; i < result.stage_events.size(); ++i) {
        CHECK(static_cast<int>(result.stage_events[i].stage) >
              static_cast<int>(result.stage_events[i - 1].stage));
        CHECK(result.stage_events[i].global_episode >
              result.stage_events[i - 1].global_episode);
    }
    // per-episode stage labels never regress
    int prev = 0;
    for (const auto& log : result.episodes) {
        int cur = log.stage == "C1" ? 0 : log.stage == "C2" ? 1 : log.stage == "C3" ? 2 : 3;
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("single-stage curriculum reduces to plain training") {
    const auto opts = fast_options();
    curriculum::PromotionCriteria crit;  // defaults never fire within 5 episodes
    auto run_curriculum = [&]() {
        Rng rng(33);
        agents::Agent agent(fast_agent_config(), rng);
        agents::ReplayBuffer buffer(10000);
        return curriculum::curriculum_train(agent, buffer, {StageId::C1}, opts, crit, 5, rng);
    };
    auto run_plain = [&]() {
        Rng rng(33);
        agents::Agent agent(fast_agent_config(), rng);
        agents::ReplayBuffer buffer(10000);
        env::Environment environment(curriculum::stage_config(StageId::C1, opts),
                                     &agent.normalizer());
        agents::warm_normalizer(environment, agent.normalizer(), rng);
        agents::TrainOptions t;
        t.episodes = 5;
        return agents::train_loop(agent, environment, buffer, t, rng, "C1");
    };
    const auto a = run_curriculum();
    const auto b = run_plain();
    REQUIRE(a.episodes.size() == b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(a.episodes[i].cumulative_reward == b[i].cumulative_reward);
        CHECK(a.episodes[i].steps == b[i].steps);
    }
}

TEST_CASE("replay buffer persists across promotions") {
    Rng rng(44);
    agents::Agent agent(fast_agent_config(), rng);
    agents::ReplayBuffer buffer(100000);
    curriculum::PromotionCriteria crit;
    crit.window = 1;
    crit.success_ratio = 0.0;
    crit.min_episodes = 2;
    const auto result = curriculum::curriculum_train(
        agent, buffer, {StageId::C1, StageId::C2, StageId::C3}, fast_options(), crit, 50, rng);
    CHECK(result.stage_events.size() == 3);
    // every episode ran and pushed transitions; nothing was flushed
    std::size_t total_steps = 0;
    for (const auto& log : result.episodes) total_steps += static_cast<std::size_t>(log.steps);
    CHECK(buffer.size() == total_steps);
}
