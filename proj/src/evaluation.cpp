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

#include "tesse/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tesse/error.hpp"

namespace tesse {
namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

MetricStats stats(const std::vector<double>& v) {
  MetricStats s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(v.size()));
  return s;
}

json stats_json(const MetricStats& s) { return {{"mean", s.mean}, {"std", s.std}}; }

json aggregate_json(const Aggregate& a) {
  return {{"episodes", a.episodes},
          {"recall", stats_json(a.recall)},
          {"precision", stats_json(a.precision)},
          {"collisions", stats_json(a.collisions)},
          {"steps", stats_json(a.steps)},
          {"score", stats_json(a.score)},
          {"explored_m2", stats_json(a.explored_m2)}};
}

template <typename T>
T field_as(const json& j, const char* key, int line) {
  const std::string path = "line " + std::to_string(line) + "/" + key;
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path, "missing");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw SchemaError(path, "wrong type");
  }
}

Pose2 pose_field(const json& j, const char* key, int line) {
  const json p = field_as<json>(j, key, line);
  return {{field_as<double>(p, "x", line), field_as<double>(p, "y", line)},
          field_as<double>(p, "yaw", line)};
}

}  // namespace

std::string event_log_to_jsonl(const EventLog& log) {
  std::string out;
  json header = {{"scene_seed", log.scene_seed},
                 {"episode_seed", log.episode_seed},
                 {"mode", mode_name(log.mode)},
                 {"policy", log.policy},
                 {"scene_digest", log.scene_digest},
                 {"n_targets", log.n_targets},
                 {"task", task_to_json(log.task)},
                 {"spawn", pose_to_json(log.spawn)}};
  out += json{{"header", header}}.dump();
  out += '\n';
  for (const EventRecord& e : log.events) {
    out += json{{"step", e.step},
                {"action", action_name(e.action)},
                {"pose", pose_to_json(e.pose)},
                {"collided", e.collided},
                {"collected_ids", e.collected_ids},
                {"reward", e.reward},
                {"done", e.done}}
               .dump();
    out += '\n';
  }
  return out;
}

EventLog event_log_from_jsonl(std::string_view text) {
  EventLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw SchemaError("line " + std::to_string(lineno), "not valid JSON");
    }
    if (!have_header) {
      const json h = field_as<json>(j, "header", lineno);
      log.scene_seed = field_as<std::uint64_t>(h, "scene_seed", lineno);
      log.episode_seed = field_as<std::uint64_t>(h, "episode_seed", lineno);
      log.mode = mode_from_name(field_as<std::string>(h, "mode", lineno));
      log.policy = field_as<std::string>(h, "policy", lineno);
      log.scene_digest = field_as<std::string>(h, "scene_digest", lineno);
      log.n_targets = field_as<int>(h, "n_targets", lineno);
      try {
        log.task = task_from_json(field_as<json>(h, "task", lineno));
      } catch (const Error& e) {
        throw SchemaError("line " + std::to_string(lineno) + "/task", e.what());
      }
      log.spawn = pose_field(h, "spawn", lineno);
      have_header = true;
      continue;
    }
    EventRecord e;
    e.step = field_as<int>(j, "step", lineno);
    const auto a = action_from_name(field_as<std::string>(j, "action", lineno));
    if (!a) throw SchemaError("line " + std::to_string(lineno) + "/action", "unknown action");
    e.action = *a;
    e.pose = pose_field(j, "pose", lineno);
    e.collided = field_as<bool>(j, "collided", lineno);
    e.collected_ids = field_as<std::vector<std::uint32_t>>(j, "collected_ids", lineno);
    e.reward = field_as<double>(j, "reward", lineno);
    e.done = field_as<bool>(j, "done", lineno);
    log.events.push_back(std::move(e));
  }
  if (!have_header) throw SchemaError("line 1/header", "missing");
  return log;
}

EpisodeResult rescore(const EventLog& log) {
  int found = 0;
  int attempts = 0;
  int successes = 0;
  int collisions = 0;
  std::vector<Vec2> trajectory{log.spawn.position};
  for (const EventRecord& e : log.events) {
    found += static_cast<int>(e.collected_ids.size());
    if (e.action == Action::kCollect) {
      ++attempts;
      if (!e.collected_ids.empty()) ++successes;
    }
    if (e.collided) ++collisions;
    trajectory.push_back(e.pose.position);
  }
  return summarize_episode(found, log.n_targets, attempts, successes, collisions,
                           static_cast<int>(log.events.size()), trajectory,
                           log.task);
}

EpisodeRun run_episode(AgentPolicy& policy, Environment& env,
                       const SessionConfig& config, std::string_view policy_name) {
  const ResetInfo info = env.reset(config);
  policy.reset(info);
  EpisodeRun run;
  EventLog& log = run.log;
  log.scene_seed = config.scene_seed.value_or(0);
  log.episode_seed = info.episode_seed;
  log.mode = info.mode;
  log.policy = policy_name.empty() ? std::string(policy.name())
                                   : std::string(policy_name);
  log.scene_digest = info.scene_digest;
  log.n_targets = info.n_targets;
  log.task = info.task;
  log.spawn = info.spawn;

  const auto mods = policy.modalities();
  bool done = info.n_targets == 0;
  while (!done) {
    Observation obs;
    if (!mods.empty()) obs = env.observe(mods);
    const Action a = policy.act(obs);
    const StepReceipt r = env.act(a);
    policy.feedback(r.collided, r.collected.size());
    log.events.push_back({r.step, a, r.pose, r.collided, r.collected, r.reward,
                          r.done});
    done = r.done;
    if (std::ssize(log.events) > info.episode_limit) {
      throw Error("simulator did not end the episode at the step limit");
    }
  }
  run.result = rescore(log);
  run.reported = env.result();
  if (!(run.result == run.reported)) {
    throw Error("event-log score " + std::to_string(run.result.score) +
                " differs from simulator score " +
                std::to_string(run.reported.score));
  }
  return run;
}

Aggregate aggregate(const std::vector<EpisodeResult>& results) {
  Aggregate a;
  a.episodes = static_cast<int>(results.size());
  std::vector<double> r, p, c, s, sc, e;
  for (const EpisodeResult& x : results) {
    r.push_back(x.recall);
    p.push_back(x.precision);
    c.push_back(x.collisions);
    s.push_back(x.actions);
    sc.push_back(x.score);
    e.push_back(x.explored_m2);
  }
  a.recall = stats(r);
  a.precision = stats(p);
  a.collisions = stats(c);
  a.steps = stats(s);
  a.score = stats(sc);
  a.explored_m2 = stats(e);
  return a;
}

std::uint64_t episode_seed_for(std::uint64_t master_seed, int scene, int episode) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(scene),
                     static_cast<std::uint64_t>(episode));
}

EvalReport evaluate(const EvalOptions& options, const PolicyFactory& make,
                    Environment& env) {
  if (options.episodes < 1) throw Error("episodes must be >= 1");
  if (options.scenes.empty()) throw Error("no scenes to evaluate");
  EvalReport report;
  report.options = options;
  const json cfg = {{"policy", options.policy},
                    {"scenes", options.scenes},
                    {"episodes", options.episodes},
                    {"mode", mode_name(options.mode)},
                    {"master_seed", options.master_seed},
                    {"task", task_to_json(options.task)},
                    {"noise", noise_to_json(options.noise)}};
  const std::string cfg_text = cfg.dump();
  report.config_digest = hex64(fnv1a64(cfg_text.data(), cfg_text.size()));

  for (int scene : options.scenes) {
    try {
      (void)canonical_scene(scene);
    } catch (const Error& e) {
      throw Error("scene " + std::to_string(scene) + " failed to load: " + e.what());
    }
  }
  if (!options.log_dir.empty()) std::filesystem::create_directories(options.log_dir);

  std::vector<EpisodeResult> all;
  for (int scene : options.scenes) {
    std::vector<EpisodeResult> scene_results;
    for (int ep = 0; ep < options.episodes; ++ep) {
      SessionConfig config;
      config.scene_seed = static_cast<std::uint64_t>(scene);
      config.episode_seed = episode_seed_for(options.master_seed, scene, ep);
      config.mode = options.mode;
      config.task = options.task;
      config.noise = options.noise;
      auto policy = make();
      EpisodeRun run;
      try {
        run = run_episode(*policy, env, config, options.policy);
      } catch (const TransportError& e) {
        report.aborted.push_back("scene " + std::to_string(scene) + " episode " +
                                 std::to_string(ep) + ": " + e.what());
        continue;
      }
      if (!options.log_dir.empty()) {
        const auto path = std::filesystem::path(options.log_dir) /
                          (options.policy + "_" + std::string(mode_name(options.mode)) +
                           "_s" + std::to_string(scene) + "_e" +
                           std::to_string(ep) + ".jsonl");
        std::ofstream(path, std::ios::binary) << event_log_to_jsonl(run.log);
      }
      report.rows.push_back({scene, ep, *config.episode_seed, run.result});
      scene_results.push_back(run.result);
      all.push_back(run.result);
    }
    report.per_scene.emplace_back(scene, aggregate(scene_results));
  }
  report.overall = aggregate(all);
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "scene,episode,recall,precision,collisions,steps,score,explored_m2\n";
  char buf[256];
  for (const EpisodeRow& row : report.rows) {
    const EpisodeResult& r = row.result;
    std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%d,%d,%.6f,%.4f\n", row.scene,
                  row.episode, r.recall, r.precision, r.collisions, r.actions,
                  r.score, r.explored_m2);
    out += buf;
  }
  return out;
}

json report_json(const EvalReport& report) {
  json per_scene = json::array();
  for (const auto& [scene, agg] : report.per_scene) {
    json j = aggregate_json(agg);
    j["scene"] = scene;
    per_scene.push_back(std::move(j));
  }
  return {{"policy", report.options.policy},
          {"mode", mode_name(report.options.mode)},
          {"scenes", report.options.scenes},
          {"episodes_per_scene", report.options.episodes},
          {"master_seed", report.options.master_seed},
          {"config_digest", report.config_digest},
          {"per_scene", per_scene},
          {"overall", aggregate_json(report.overall)},
          {"aborted", report.aborted}};
}

}  // namespace tesse
