#pragma once

// Evaluation harness: fixed-start trials with per-trial waypoint
// randomization, summary metrics, and CSV/JSON export for external plotting.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amnav/agents.hpp"
#include "amnav/env.hpp"

namespace amnav::eval {

struct TrialRecord {
    int trial = 0;
    double cumulative_reward = 0.0;
    double final_error = 0.0;  // Euclidean distance to the final target, m
    env::TerminationStatus status = env::TerminationStatus::Running;
    std::vector<Vec3> trajectory;  // filled when requested
    std::vector<Vec3> waypoints;
};

struct MetricsSummary {
    double avg_cumulative_reward = 0.0;
    double reward_stddev = 0.0;       // population
    double avg_positional_error = 0.0;
    double precision = 0.0;           // population std of positional error
    double success_ratio = 0.0;       // percent
    int trials = 0;
};

/// Interface for the policy under evaluation; lets scripted oracle policies
/// share the harness with trained agents.
struct Policy {
    virtual ~Policy() = default;
    virtual env::RawAction act(const env::Observation& obs, Rng& rng) = 0;
    virtual void on_episode_start() {}
};

struct AgentPolicy : Policy {
    explicit AgentPolicy(agents::Agent& agent) : agent_(agent) {}
    env::RawAction act(const env::Observation& obs, Rng& rng) override {
        return agent_.select_action(obs, /*explore=*/false, rng);
    }
    agents::Agent& agent_;
};

/// One frozen-policy episode. Trial seeds are a pure function of base_seed
/// and trial index, so execution order does not matter.
inline TrialRecord run_trial(Policy& policy, const env::EnvConfig& config,
                             env::Normalizer& normalizer, int trial, std::uint64_t base_seed,
                             bool record_trajectory = false) {
    expects(normalizer.frozen(), "run_trial: normalizer must be frozen");
    Rng rng(base_seed + static_cast<std::uint64_t>(trial));
    env::Environment environment(config, &normalizer);
    policy.on_episode_start();
    env::Observation obs = environment.reset(env::Environment::Mode::Eval, rng);
    TrialRecord record;
    record.trial = trial;
    record.waypoints = environment.waypoints();
    if (record_trajectory) record.trajectory.push_back(environment.state().position);
    while (!environment.done()) {
        const env::RawAction action = policy.act(obs, rng);
        const env::StepResult result = environment.step(action, rng);
        obs = result.observation;
        record.cumulative_reward += result.reward;
        if (record_trajectory) record.trajectory.push_back(environment.state().position);
    }
    record.status = environment.status();
    record.final_error = norm(environment.state().position - environment.waypoints().back());
    return record;
}

inline std::vector<TrialRecord> run_trials(Policy& policy, const env::EnvConfig& config,
                                           env::Normalizer& normalizer, int n,
                                           std::uint64_t base_seed,
                                           bool record_trajectory = false) {
    std::vector<TrialRecord> records;
    records.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
        records.push_back(run_trial(policy, config, normalizer, t, base_seed, record_trajectory));
    return records;
}

/// Means and population standard deviations over all trials, successes and
/// failures alike. Success ratio in percent.
inline MetricsSummary compute_metrics(const std::vector<TrialRecord>& records) {
    expects(!records.empty(), "compute_metrics: no records");
    MetricsSummary s;
    s.trials = static_cast<int>(records.size());
    const double n = static_cast<double>(records.size());
    int successes = 0;
    for (const TrialRecord& r : records) {
        s.avg_cumulative_reward += r.cumulative_reward;
        s.avg_positional_error += r.final_error;
        if (r.status == env::TerminationStatus::Success) successes += 1;
    }
    s.avg_cumulative_reward /= n;
    s.avg_positional_error /= n;
    double var_r = 0.0, var_e = 0.0;
    for (const TrialRecord& r : records) {
        var_r += (r.cumulative_reward - s.avg_cumulative_reward) *
                 (r.cumulative_reward - s.avg_cumulative_reward);
        var_e += (r.final_error - s.avg_positional_error) * (r.final_error - s.avg_positional_error);
    }
    s.reward_stddev = std::sqrt(var_r / n);
    s.precision = std::sqrt(var_e / n);
    s.success_ratio = static_cast<double>(successes) / n * 100.0;
    return s;
}

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline const char* kTrialCsvHeader = "trial,cumulative_reward,final_error,status";

inline void export_trials_csv(const std::vector<TrialRecord>& records, const std::string& path) {
    std::ofstream out(path);
    expects(out.good(), "export_trials_csv: cannot open " + path);
    out << kTrialCsvHeader << "\n";
    for (const TrialRecord& r : records)
        out << r.trial << "," << format_double(r.cumulative_reward) << ","
            << format_double(r.final_error) << "," << env::to_string(r.status) << "\n";
    expects(out.good(), "export_trials_csv: write failed for " + path);
}

inline env::TerminationStatus parse_status(const std::string& s) {
    if (s == "Running") return env::TerminationStatus::Running;
    if (s == "Success") return env::TerminationStatus::Success;
    if (s == "Crash") return env::TerminationStatus::Crash;
    if (s == "OutOfBounds") return env::TerminationStatus::OutOfBounds;
    if (s == "Timeout") return env::TerminationStatus::Timeout;
    throw ContractViolation("unknown termination status: " + s);
}

inline std::vector<TrialRecord> import_trials_csv(const std::string& path) {
    std::ifstream in(path);
    expects(in.good(), "import_trials_csv: cannot open " + path);
    std::string line;
    std::getline(in, line);
    expects(line == kTrialCsvHeader, "import_trials_csv: unexpected header in " + path);
    std::vector<TrialRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        TrialRecord r;
        std::getline(ss, field, ',');
        r.trial = std::stoi(field);
        std::getline(ss, field, ',');
        r.cumulative_reward = std::stod(field);
        std::getline(ss, field, ',');
        r.final_error = std::stod(field);
        std::getline(ss, field, ',');
        r.status = parse_status(field);
        records.push_back(r);
    }
    return records;
}

inline nlohmann::json summary_to_json(const MetricsSummary& s) {
    return {{"trials", s.trials},
            {"avg_cumulative_reward", s.avg_cumulative_reward},
            {"reward_stddev", s.reward_stddev},
            {"avg_positional_error", s.avg_positional_error},
            {"precision", s.precision},
            {"success_ratio", s.success_ratio}};
}

inline void export_summary(const MetricsSummary& s, const std::string& path) {
    std::ofstream out(path);
    expects(out.good(), "export_summary: cannot open " + path);
    out << summary_to_json(s).dump(2) << "\n";
}

/// Trajectory export: CSV of ordered position samples plus a JSON sidecar-free
/// metadata block listing the waypoints (lines prefixed '#').
inline void export_trajectory(const TrialRecord& record, const std::string& path) {
    std::ofstream out(path);
    expects(out.good(), "export_trajectory: cannot open " + path);
    nlohmann::json meta;
    meta["trial"] = record.trial;
    meta["status"] = env::to_string(record.status);
    meta["waypoints"] = nlohmann::json::array();
    for (const Vec3& w : record.waypoints)
        meta["waypoints"].push_back({w[0], w[1], w[2]});
    out << "# " << meta.dump() << "\n";
    out << "step,x,y,z\n";
    for (std::size_t i = 0; i < record.trajectory.size(); ++i)
        out << i << "," << format_double(record.trajectory[i][0]) << ","
            << format_double(record.trajectory[i][1]) << ","
            << format_double(record.trajectory[i][2]) << "\n";
    expects(out.good(), "export_trajectory: write failed for " + path);
}

}  // namespace amnav::eval
