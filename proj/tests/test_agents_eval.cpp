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
#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "fixtures.hpp"
#include "tesse/client.hpp"
#include "tesse/error.hpp"
#include "tesse/evaluation.hpp"
#include "tesse/server.hpp"
#include "tesse/sensors.hpp"

namespace tesse {

void PrintTo(SimMode m, std::ostream* os) { *os << mode_name(m); }

namespace {

using nlohmann::json;

SessionConfig config_for(std::uint64_t scene, std::uint64_t episode, int limit = 400) {
  SessionConfig c;
  c.scene_seed = scene;
  c.episode_seed = episode;
  c.task.episode_limit = limit;
  return c;
}

// ---- policies ----

TEST(RandomPolicy, UniformOverFourActions) {
  Rng rng(17);
  std::array<int, 4> counts{};
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<int>(random_policy_act(rng))];
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(n), 0.25, 0.01);
}

TEST(RandomPolicy, SeededSequenceRepeats) {
  RandomPolicy a(5);
  RandomPolicy b(5);
  ResetInfo info;
  info.episode_seed = 3;
  a.reset(info);
  b.reset(info);
  const Observation obs;
  for (int i = 0; i < 200; ++i) ASSERT_EQ(a.act(obs), b.act(obs)) << i;
}

class FrontierTargetTest : public ::testing::Test {
 protected:
  Observation view_with_target(Vec2 lo, Vec2 hi) {
    const auto scene = testing::geometry(testing::open_room(20.0, 20.0, {5.0, 10.0}));
    const Obstacle target = testing::box(lo.x, lo.y, hi.x, hi.y, SemanticClass::kTarget,
                                         99, 0.6);
    const Frames f = render_frames(*scene, pose, camera, std::span(&target, 1));
    Observation obs;
    obs.modalities = {Modality::kDepth, Modality::kSeg};
    obs.pose = {pose.position, pose.yaw, false};
    obs.depth = f.depth;
    obs.seg = f.seg;
    return obs;
  }
  FrontierPolicy start() {
    FrontierPolicy p(1);
    ResetInfo info;
    info.camera = camera;
    info.spawn = pose;
    p.reset(info);
    return p;
  }

  Pose2 pose{{5.0, 10.0}, 0.0};
  CameraIntrinsics camera;
};

TEST_F(FrontierTargetTest, CollectsCenteredTargetInRange) {
  FrontierPolicy p = start();
  EXPECT_EQ(p.act(view_with_target({6.5, 9.9}, {6.7, 10.1})), Action::kCollect);
}

TEST_F(FrontierTargetTest, TurnsTowardTargetAtLeftEdge) {
  FrontierPolicy p = start();
  EXPECT_EQ(p.act(view_with_target({6.5, 11.1}, {6.6, 11.3})), Action::kTurnLeft);
}

TEST_F(FrontierTargetTest, TurnsTowardTargetAtRightEdge) {
  FrontierPolicy p = start();
  EXPECT_EQ(p.act(view_with_target({6.5, 8.7}, {6.6, 8.9})), Action::kTurnRight);
}

TEST_F(FrontierTargetTest, ApproachesDistantCenteredTarget) {
  FrontierPolicy p = start();
  EXPECT_EQ(p.act(view_with_target({9.0, 9.9}, {9.2, 10.1})), Action::kMoveForward);
}

TEST(OccupancyGrid, HitsAndPasses) {
  OccupancyGrid g({0.0, 0.0}, 0.25, 40);
  const auto c = g.cell_of({1.0, 1.0});
  ASSERT_TRUE(c);
  EXPECT_FALSE(g.known(c->first, c->second));
  g.add_pass({1.0, 1.0});
  EXPECT_TRUE(g.free(c->first, c->second));
  g.add_hit({1.0, 1.0});
  EXPECT_TRUE(g.occupied(c->first, c->second));
  g.add_pass({1.0, 1.0}, true);
  EXPECT_TRUE(g.occupied(c->first, c->second));
  EXPECT_FALSE(g.cell_of({100.0, 0.0}));
}

TEST(Policies, FactoryNames) {
  EXPECT_EQ(make_policy("random", 1)->name(), "random");
  EXPECT_EQ(make_policy("frontier", 1)->name(), "frontier");
  EXPECT_THROW(make_policy("oracle", 1), Error);
}

// ---- episode runner ----

TEST(RunEpisode, TurningInPlaceScoresByFormula) {
  LocalEnvironment env;
  ConstantPolicy policy(Action::kTurnLeft);
  const EpisodeRun run = run_episode(policy, env, config_for(4, 2));
  EXPECT_EQ(run.result.recall, 0.0);
  EXPECT_EQ(run.result.precision, 0.0);
  EXPECT_EQ(run.result.actions, 400);
  EXPECT_EQ(run.result.collisions, 0);
  EXPECT_NEAR(run.result.score, -0.1, 1e-12);
  EXPECT_EQ(run.log.events.size(), 400u);
  EXPECT_TRUE(run.log.events.back().done);
  EXPECT_EQ(run.result, run.reported);
}

TEST(RunEpisode, Deterministic) {
  LocalEnvironment env;
  FrontierPolicy a(3);
  FrontierPolicy b(3);
  const EpisodeRun r1 = run_episode(a, env, config_for(5, 11, 120));
  const EpisodeRun r2 = run_episode(b, env, config_for(5, 11, 120));
  EXPECT_EQ(r1.log, r2.log);
  EXPECT_EQ(r1.result, r2.result);
}

TEST(RunEpisode, LogAgreesWithSimulator) {
  LocalEnvironment env;
  for (std::uint64_t ep = 0; ep < 3; ++ep) {
    RandomPolicy random(ep);
    const EpisodeRun run = run_episode(random, env, config_for(4, ep, 150));
    EXPECT_EQ(run.result, run.reported);
    EXPECT_EQ(rescore(run.log), run.result);
  }
}

// ---- event log schema ----

TEST(EventLog, JsonlRoundTrip) {
  LocalEnvironment env;
  RandomPolicy policy(9);
  const EpisodeRun run = run_episode(policy, env, config_for(4, 6, 80), "random");
  const std::string text = event_log_to_jsonl(run.log);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 81);
  const EventLog back = event_log_from_jsonl(text);
  EXPECT_EQ(back, run.log);
  EXPECT_EQ(event_log_to_jsonl(back), text);
  EXPECT_EQ(rescore(back), run.result);
}

TEST(EventLog, SchemaFields) {
  LocalEnvironment env;
  RandomPolicy policy(9);
  const EpisodeRun run = run_episode(policy, env, config_for(4, 6, 5), "random");
  const std::string text = event_log_to_jsonl(run.log);
  const json header = json::parse(text.substr(0, text.find('\n')))["header"];
  for (const char* k : {"scene_seed", "episode_seed", "mode", "policy", "scene_digest",
                        "n_targets", "task", "spawn"}) {
    EXPECT_TRUE(header.contains(k)) << k;
  }
  EXPECT_EQ(header["policy"], "random");
  const std::size_t a = text.find('\n') + 1;
  const json first = json::parse(text.substr(a, text.find('\n', a) - a));
  for (const char* k : {"step", "action", "pose", "collided", "collected_ids", "reward",
                        "done"}) {
    EXPECT_TRUE(first.contains(k)) << k;
  }
  EXPECT_EQ(first["step"], 1);
}

TEST(EventLog, MalformedLinesNameTheField) {
  const std::string header =
      R"({"header":{"scene_seed":4,"episode_seed":1,"mode":"gt","policy":"x",)"
      R"("scene_digest":"0","n_targets":1,"task":{},"spawn":{"x":0,"y":0,"yaw":0}}})";
  const std::string good =
      R"({"step":1,"action":"turn_left","pose":{"x":0,"y":0,"yaw":0.1},)"
      R"("collided":false,"collected_ids":[],"reward":0,"done":false})";
  EXPECT_NO_THROW(event_log_from_jsonl(header + "\n" + good + "\n"));
  try {
    std::string bad = good;
    bad.replace(bad.find("\"turn_left\""), 11, "42");
    event_log_from_jsonl(header + "\n" + bad + "\n");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(event_log_from_jsonl(good + "\n"), SchemaError);
  EXPECT_THROW(event_log_from_jsonl(header + "\n{oops\n"), SchemaError);
}

// ---- aggregation and reports ----

TEST(Aggregate, SingleEpisodeHasZeroSpread) {
  EpisodeResult r{0.5, 1.0, 3, 400, 400, 0.5, 12.0};
  const Aggregate a = aggregate({r});
  EXPECT_EQ(a.episodes, 1);
  EXPECT_EQ(a.score.mean, 0.5);
  EXPECT_EQ(a.score.std, 0.0);
  EXPECT_EQ(a.collisions.std, 0.0);
}

TEST(Aggregate, PopulationStatistics) {
  std::vector<EpisodeResult> rs;
  for (double s : {1.0, 2.0, 3.0, 4.0}) rs.push_back({0.0, 0.0, 0, 10, 400, s, 2.0 * s});
  const Aggregate a = aggregate(rs);
  EXPECT_DOUBLE_EQ(a.score.mean, 2.5);
  EXPECT_DOUBLE_EQ(a.score.std, std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(a.explored_m2.mean, 5.0);
  EXPECT_DOUBLE_EQ(a.steps.std, 0.0);
}

TEST(Evaluate, CsvIsDeterministic) {
  EvalOptions opt;
  opt.scenes = {4, 5};
  opt.episodes = 2;
  opt.master_seed = 1;
  opt.task.episode_limit = 60;
  auto factory = [] { return make_policy("random", 1); };
  LocalEnvironment env1;
  LocalEnvironment env2;
  const EvalReport a = evaluate(opt, factory, env1);
  const EvalReport b = evaluate(opt, factory, env2);
  EXPECT_EQ(report_csv(a), report_csv(b));
  EXPECT_EQ(a.rows.size(), 4u);
  EXPECT_EQ(a.config_digest, b.config_digest);
  const std::string csv = report_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "scene,episode,recall,precision,collisions,steps,score,explored_m2");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(Evaluate, ReportAggregatesRows) {
  EvalOptions opt;
  opt.scenes = {4};
  opt.episodes = 3;
  opt.task.episode_limit = 40;
  LocalEnvironment env;
  const EvalReport r = evaluate(opt, [] { return make_policy("random", 2); }, env);
  double sum = 0.0;
  for (const EpisodeRow& row : r.rows) sum += row.result.score;
  EXPECT_NEAR(r.overall.score.mean, sum / 3.0, 1e-12);
  ASSERT_EQ(r.per_scene.size(), 1u);
  EXPECT_EQ(r.per_scene[0].first, 4);
  const json j = report_json(r);
  EXPECT_EQ(j["episodes_per_scene"], 3);
  EXPECT_EQ(j["config_digest"], r.config_digest);
}

TEST(Evaluate, SeedsDependOnSceneAndEpisode) {
  EXPECT_EQ(episode_seed_for(1, 4, 0), episode_seed_for(1, 4, 0));
  EXPECT_NE(episode_seed_for(1, 4, 0), episode_seed_for(1, 4, 1));
  EXPECT_NE(episode_seed_for(1, 4, 0), episode_seed_for(1, 5, 0));
  EXPECT_NE(episode_seed_for(1, 4, 0), episode_seed_for(2, 4, 0));
}

TEST(Evaluate, RejectsBadOptions) {
  LocalEnvironment env;
  EvalOptions opt;
  opt.episodes = 0;
  auto factory = [] { return make_policy("random", 0); };
  EXPECT_THROW(evaluate(opt, factory, env), Error);
  opt.episodes = 1;
  opt.scenes = {};
  EXPECT_THROW(evaluate(opt, factory, env), Error);
}

// ---- transport equivalence ----

class TransportTest : public ::testing::TestWithParam<SimMode> {};

TEST_P(TransportTest, LocalAndRemoteLogsMatch) {
  ServerOptions opt;
  opt.port = 0;
  opt.odom_port = 0;
  opt.ws_port = 0;
  opt.enable_ws = false;
  Server server(opt);
  server.start();
  SessionConfig cfg = config_for(4, 21, 100);
  cfg.mode = GetParam();

  LocalEnvironment local;
  RemoteEnvironment remote("127.0.0.1", server.port());
  FrontierPolicy a(7);
  FrontierPolicy b(7);
  const EpisodeRun r1 = run_episode(a, local, cfg, "frontier");
  const EpisodeRun r2 = run_episode(b, remote, cfg, "frontier");
  EXPECT_EQ(event_log_to_jsonl(r1.log), event_log_to_jsonl(r2.log));
  EXPECT_EQ(r1.result, r2.result);
  server.stop();
}

INSTANTIATE_TEST_SUITE_P(Modes, TransportTest,
                         ::testing::Values(SimMode::kGroundTruth, SimMode::kPerception),
                         [](const auto& info) { return std::string(mode_name(info.param)); });

}  // namespace
}  // namespace tesse
