// Command-line workbench: train, eval, demo subcommands over the amnav
// library. All runs are reproducible from (config, seed); resolved configs
// are echoed into the output directory.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "amnav/checkpoint.hpp"
#include "amnav/config.hpp"
#include "amnav/curriculum.hpp"
#include "amnav/eval.hpp"
#include "amnav/pilot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace amnav;

namespace {

json resolve_config(const std::string& config_path, const std::vector<std::string>& overrides) {
    json user;
    if (!config_path.empty()) user = config::load_file(config_path);
    return config::resolve(user, overrides);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out.good()) throw std::runtime_error("cannot open for write: " + path.string());
    out << text;
    if (!out.good()) throw std::runtime_error("write failed: " + path.string());
}

void write_episode_log(const fs::path& path, const std::vector<agents::EpisodeLog>& logs) {
    std::ostringstream out;
    out << "episode,stage,steps,cumulative_reward,status\n";
    for (const auto& l : logs)
        out << l.episode << "," << l.stage << "," << l.steps << ","
            << eval::format_double(l.cumulative_reward) << "," << env::to_string(l.status) << "\n";
    write_text(path, out.str());
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_dir) {
    const json cfg = resolve_config(config_path, overrides);
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "resolved_config.json", cfg.dump(2) + "\n");

    const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    Rng rng(seed);
    agents::Agent agent(config::agent_config(cfg), rng);
    agents::ReplayBuffer buffer(agent.config().buffer_capacity);

    const int episodes = cfg.at("training").at("episodes").get<int>();
    const int checkpoint_every = cfg.at("training").at("checkpoint_every").get<int>();
    const auto opts = config::stage_options(cfg);
    std::vector<agents::EpisodeLog> logs;
    std::string stage_reached;

    if (cfg.at("curriculum").at("enabled").get<bool>()) {
        const auto result = curriculum::curriculum_train(
            agent, buffer, config::stage_list(cfg), opts, config::promotion_criteria(cfg),
            episodes, rng);
        logs = result.episodes;
        stage_reached = curriculum::to_string(result.final_stage);
        std::ostringstream st;
        st << "stage,first_episode\n";
        for (const auto& ev : result.stage_events) {
            st << curriculum::to_string(ev.stage) << "," << ev.global_episode << "\n";
            ckpt::save(agent, (fs::path(out_dir) / ("checkpoint_" +
                       std::string(curriculum::to_string(ev.stage)) + ".json")).string(),
                       curriculum::to_string(ev.stage), buffer.size());
        }
        write_text(fs::path(out_dir) / "stage_log.csv", st.str());
    } else {
        const auto stage = config::parse_stage(cfg.at("training").at("stage").get<std::string>());
        env::Environment environment(curriculum::stage_config(stage, opts), &agent.normalizer());
        stage_reached = curriculum::to_string(stage);
        agents::warm_normalizer(environment, agent.normalizer(), rng);
        if (opts.demo_prefill_steps > 0)
            pilot::seed_replay(environment, agent.normalizer(), buffer, opts.demo_prefill_steps,
                               opts.demo_noise_amp, rng);
        const std::size_t warmup = cfg.at("training").at("warmup").get<std::size_t>();
        for (int done = 0; done < episodes;) {
            agents::TrainOptions chunk;
            chunk.episodes = std::min(checkpoint_every, episodes - done);
            chunk.warmup = warmup;
            auto chunk_logs =
                agents::train_loop(agent, environment, buffer, chunk, rng, stage_reached);
            for (auto& l : chunk_logs) l.episode += done;
            logs.insert(logs.end(), chunk_logs.begin(), chunk_logs.end());
            done += chunk.episodes;
            ckpt::save(agent,
                       (fs::path(out_dir) / ("checkpoint_" + std::to_string(done) + ".json")).string(),
                       stage_reached, buffer.size());
        }
    }

    write_episode_log(fs::path(out_dir) / "training_log.csv", logs);
    ckpt::save(agent, (fs::path(out_dir) / "checkpoint_final.json").string(), stage_reached,
               buffer.size());
    std::cout << "trained " << logs.size() << " episodes; final stage " << stage_reached
              << "; outputs in " << out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& config_path,
             const std::vector<std::string>& overrides, int trials, std::uint64_t seed,
             const std::string& out_dir) {
    const json cfg = resolve_config(config_path, overrides);
    auto loaded = ckpt::load(checkpoint_path);
    loaded.agent.normalizer().freeze();

    const std::string stage_name = loaded.stage_reached.empty()
                                       ? cfg.at("training").at("stage").get<std::string>()
                                       : loaded.stage_reached;
    env::EnvConfig env_cfg =
        curriculum::stage_config(config::parse_stage(stage_name), config::stage_options(cfg));
    env_cfg.randomize_start = false;  // test protocol: fixed start, random waypoints

    eval::AgentPolicy policy(loaded.agent);
    const auto records =
        eval::run_trials(policy, env_cfg, loaded.agent.normalizer(), trials, seed);
    const auto summary = eval::compute_metrics(records);

    fs::create_directories(out_dir);
    eval::export_trials_csv(records, (fs::path(out_dir) / "trials.csv").string());
    eval::export_summary(summary, (fs::path(out_dir) / "summary.json").string());
    std::cout << "trials: " << summary.trials << "\n"
              << "avg cumulative reward: " << eval::format_double(summary.avg_cumulative_reward)
              << "\n"
              << "reward stddev: " << eval::format_double(summary.reward_stddev) << "\n"
              << "avg positional error (m): " << eval::format_double(summary.avg_positional_error)
              << "\n"
              << "precision: " << eval::format_double(summary.precision) << "\n"
              << "success ratio: " << summary.success_ratio << "%\n";
    return 0;
}

int cmd_demo(const std::string& checkpoint_path, const std::string& config_path,
             const std::vector<std::string>& overrides, int waypoints, std::uint64_t seed,
             const std::string& out_dir) {
    const json cfg = resolve_config(config_path, overrides);
    auto loaded = ckpt::load(checkpoint_path);
    loaded.agent.normalizer().freeze();

    // variable-mass multi-waypoint demonstration run
    auto opts = config::stage_options(cfg);
    opts.waypoint_count = waypoints;
    env::EnvConfig env_cfg = curriculum::stage_config(curriculum::StageId::C3, opts);
    env_cfg.randomize_start = false;

    eval::AgentPolicy policy(loaded.agent);
    const auto record = eval::run_trial(policy, env_cfg, loaded.agent.normalizer(), 0, seed,
                                        /*record_trajectory=*/true);
    fs::create_directories(out_dir);
    const auto path = fs::path(out_dir) / "trajectory.csv";
    eval::export_trajectory(record, path.string());
    std::cout << "demo episode: " << record.trajectory.size() - 1 << " steps, status "
              << env::to_string(record.status) << ", trajectory in " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DRL workbench for multirotor waypoint navigation with material deposition"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "run", checkpoint_path;
    std::vector<std::string> overrides;
    std::string algorithm;
    std::int64_t seed = -1;
    int trials = 100, waypoints = 6;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (defaults used if omitted)");
        sub->add_option("--set", overrides, "dotted-key override, e.g. agent.discount=0.95");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "RNG seed (overrides config)");
        sub->add_option("--algorithm", algorithm, "ddpg or td3 (overrides config)");
    };

    CLI::App* train = app.add_subcommand("train", "train an agent and write checkpoints/logs");
    add_common(train);
    CLI::App* evl = app.add_subcommand("eval", "evaluate a checkpoint over N trials");
    add_common(evl);
    evl->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    evl->add_option("--trials", trials, "number of evaluation trials");
    CLI::App* demo = app.add_subcommand("demo", "run one multi-waypoint episode, export trajectory");
    add_common(demo);
    demo->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    demo->add_option("--waypoints", waypoints, "number of waypoints");

    CLI11_PARSE(app, argc, argv);

    if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
    if (!algorithm.empty()) overrides.push_back("algorithm=\"" + algorithm + "\"");

    try {
        if (train->parsed()) return cmd_train(config_path, overrides, out_dir);
        const std::uint64_t eval_seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : 0;
        if (evl->parsed())
            return cmd_eval(checkpoint_path, config_path, overrides, trials, eval_seed, out_dir);
        if (demo->parsed())
            return cmd_demo(checkpoint_path, config_path, overrides, waypoints, eval_seed, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
