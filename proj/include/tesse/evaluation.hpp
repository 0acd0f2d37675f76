// Copyright 2026 The tesse-lite Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tesse/agents.hpp"
#include "tesse/environment.hpp"

namespace tesse {

struct EventRecord {
  int step = 0;
  Action action = Action::kCollect;
  Pose2 pose;  // ground truth after the step
  bool collided = false;
  std::vector<std::uint32_t> collected_ids;
  double reward = 0.0;
  bool done = false;

  bool operator==(const EventRecord&) const = default;
};

/// Episode log: a header record followed by one record per step.
struct EventLog {
  std::uint64_t scene_seed = 0;
  std::uint64_t episode_seed = 0;
  SimMode mode = SimMode::kGroundTruth;
  std::string policy;
  std::string scene_digest;
  int n_targets = 0;
  TaskConfig task;
  Pose2 spawn;
  std::vector<EventRecord> events;

  bool operator==(const EventLog&) const = default;
};

/// JSON-lines: {"header": {...}} then one {"step", "action", "pose",
/// "collided", "collected_ids", "reward", "done"} per line.
std::string event_log_to_jsonl(const EventLog& log);
/// Throws SchemaError naming the line and field on malformed input.
EventLog event_log_from_jsonl(std::string_view text);

/// Recomputes the result from the log alone.
EpisodeResult rescore(const EventLog& log);

struct EpisodeRun {
  EpisodeResult result;    // recomputed from the event log
  EpisodeResult reported;  // as reported by the simulator
  EventLog log;
};

/// reset, then act/step until done. Throws Error when the log-derived result
/// disagrees with the simulator.
EpisodeRun run_episode(AgentPolicy& policy, Environment& env,
                       const SessionConfig& config,
                       std::string_view policy_name = {});

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct Aggregate {
  int episodes = 0;
  MetricStats recall;
  MetricStats precision;
  MetricStats collisions;
  MetricStats steps;
  MetricStats score;
  MetricStats explored_m2;
};

Aggregate aggregate(const std::vector<EpisodeResult>& results);

struct EpisodeRow {
  int scene = 0;
  int episode = 0;
  std::uint64_t episode_seed = 0;
  EpisodeResult result;
};

struct EvalOptions {
  std::string policy = "random";
  std::vector<int> scenes = {4, 5};
  int episodes = 100;  // per scene
  SimMode mode = SimMode::kGroundTruth;
  std::uint64_t master_seed = 0;
  TaskConfig task;
  NoiseConfig noise;
  std::string log_dir;  // per-episode JSON-lines logs when non-empty
};

struct EvalReport {
  EvalOptions options;
  std::vector<EpisodeRow> rows;
  std::vector<std::pair<int, Aggregate>> per_scene;
  Aggregate overall;
  std::vector<std::string> aborted;  // transport failures, excluded
  std::string config_digest;
};

std::uint64_t episode_seed_for(std::uint64_t master_seed, int scene,
                               int episode);

using PolicyFactory = std::function<std::unique_ptr<AgentPolicy>()>;

/// Runs options.episodes episodes on each scene. Throws Error naming a scene
/// that fails to load.
EvalReport evaluate(const EvalOptions& options, const PolicyFactory& make_policy,
                    Environment& env);

/// scene,episode,recall,precision,collisions,steps,score,explored_m2
std::string report_csv(const EvalReport& report);
nlohmann::json report_json(const EvalReport& report);

}  // namespace tesse
