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

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tesse/client.hpp"
#include "tesse/error.hpp"
#include "tesse/evaluation.hpp"
#include "tesse/server.hpp"

namespace {

using nlohmann::json;

tesse::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tesse::Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tesse::Error("cannot write " + path);
  out << data;
}

std::vector<int> parse_scenes(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw tesse::Error("bad scene id '" + item + "'");
    }
  }
  return out;
}

tesse::WorldMap load_world(std::uint64_t seed, const std::string& file) {
  if (!file.empty()) return tesse::scene_from_json(read_file(file));
  return tesse::generate_scene(seed);
}

void print_summary(const tesse::EvalReport& r) {
  auto row = [](const std::string& label, const tesse::Aggregate& a) {
    std::printf("%-8s %4d  %6.3f±%.3f  %6.3f±%.3f  %7.1f±%.1f  %6.1f  %7.3f±%.3f  %6.1f±%.1f\n",
                label.c_str(), a.episodes, a.recall.mean, a.recall.std,
                a.precision.mean, a.precision.std, a.collisions.mean,
                a.collisions.std, a.steps.mean, a.score.mean, a.score.std,
                a.explored_m2.mean, a.explored_m2.std);
  };
  std::printf("policy=%s mode=%s seed=%llu config=%s\n", r.options.policy.c_str(),
              std::string(tesse::mode_name(r.options.mode)).c_str(),
              static_cast<unsigned long long>(r.options.master_seed),
              r.config_digest.c_str());
  std::printf("%-8s %4s  %12s  %12s  %12s  %6s  %13s  %11s\n", "scene", "n",
              "recall", "precision", "collisions", "steps", "score", "explored");
  for (const auto& [scene, agg] : r.per_scene) row(std::to_string(scene), agg);
  row("all", r.overall);
  for (const auto& a : r.aborted) std::printf("aborted: %s\n", a.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tesse: headless indoor simulator, object-search task and evaluation"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the command/odometry/websocket server");
  tesse::ServerOptions sopt;
  std::string serve_mode = "gt";
  std::string scene_dir;
  serve->add_option("--host", sopt.host, "Bind address")->capture_default_str();
  serve->add_option("--port", sopt.port, "Command stream port")->capture_default_str();
  serve->add_option("--odom-port", sopt.odom_port, "Odometry datagram port")->capture_default_str();
  serve->add_option("--ws-port", sopt.ws_port, "Websocket port")->capture_default_str();
  serve->add_option("--scene-dir", scene_dir, "Directory of scene JSON files");
  serve->add_option("--mode", serve_mode, "Default mode: gt or perception")->capture_default_str();
  serve->add_option("--seed", sopt.defaults.master_seed, "Seed for episodes reset without one")->capture_default_str();
  bool no_ws = false;
  serve->add_flag("--no-ws", no_ws, "Disable the websocket endpoint");

  // eval
  auto* eval = app.add_subcommand("eval", "Monte Carlo evaluation of a policy");
  tesse::EvalOptions eopt;
  std::string scenes = "4,5";
  std::string eval_mode = "gt";
  std::string csv_out;
  std::string json_out;
  std::string server;
  eval->add_option("--policy", eopt.policy, "random or frontier")->capture_default_str();
  eval->add_option("--scenes", scenes, "Comma-separated scene ids")->capture_default_str();
  eval->add_option("--episodes", eopt.episodes, "Episodes per scene")->capture_default_str();
  eval->add_option("--mode", eval_mode, "gt or perception")->capture_default_str();
  eval->add_option("--seed", eopt.master_seed, "Master seed")->capture_default_str();
  eval->add_option("--targets", eopt.task.n_targets, "Targets per episode")->capture_default_str();
  eval->add_option("--limit", eopt.task.episode_limit, "Actions per episode")->capture_default_str();
  eval->add_option("--out", csv_out, "Per-episode CSV report");
  eval->add_option("--json", json_out, "Aggregate JSON report");
  eval->add_option("--log-dir", eopt.log_dir, "Write per-episode event logs here");
  eval->add_option("--server", server, "host:port of a running server (default: in process)");
  bool quiet = false;
  eval->add_flag("--quiet", quiet, "Do not print the summary table");

  // scene
  auto* scene = app.add_subcommand("scene", "Generate a scene and write its JSON");
  std::uint64_t scene_seed = 4;
  std::string scene_out;
  scene->add_option("--seed", scene_seed, "Scene seed (1..5 are the canonical scenes)")->capture_default_str();
  scene->add_option("--out", scene_out, "Output file (default stdout)");

  // export-mesh
  auto* mesh = app.add_subcommand("export-mesh", "Export a scene mesh");
  std::uint64_t mesh_seed = 4;
  std::string mesh_file;
  std::string mesh_format = "ply";
  std::string mesh_out;
  mesh->add_option("--seed", mesh_seed, "Scene seed")->capture_default_str();
  mesh->add_option("--scene-file", mesh_file, "Scene JSON instead of a seed");
  mesh->add_option("--format", mesh_format, "ply or obj")->capture_default_str();
  mesh->add_option("--out", mesh_out, "Output file")->required();

  // validate
  auto* validate = app.add_subcommand("validate", "Check a scene file against the scene invariants");
  std::string validate_file;
  validate->add_option("file", validate_file, "Scene JSON")->required();

  // rescore
  auto* rescore = app.add_subcommand("rescore", "Recompute an episode result from its event log");
  std::string log_file;
  rescore->add_option("log", log_file, "Event log (JSON lines)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      sopt.defaults.mode = tesse::mode_from_name(serve_mode);
      sopt.scene_dir = scene_dir;
      sopt.enable_ws = !no_ws;
      tesse::Server srv(sopt);
      srv.start();
      g_server = &srv;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::fprintf(stderr, "listening: command %s:%u, odometry udp %u, websocket %u\n",
                   sopt.host.c_str(), srv.port(), srv.odom_port(), srv.ws_port());
      srv.wait();
      g_server = nullptr;
      return 0;
    }
    if (*eval) {
      eopt.scenes = parse_scenes(scenes);
      eopt.mode = tesse::mode_from_name(eval_mode);
      const auto policy_seed = eopt.master_seed;
      const std::string policy_name = eopt.policy;
      (void)tesse::make_policy(policy_name, policy_seed);
      tesse::PolicyFactory factory = [&] {
        return tesse::make_policy(policy_name, policy_seed);
      };
      std::unique_ptr<tesse::Environment> env;
      if (server.empty()) {
        env = std::make_unique<tesse::LocalEnvironment>();
      } else {
        const auto colon = server.rfind(':');
        if (colon == std::string::npos) throw tesse::Error("--server expects host:port");
        env = std::make_unique<tesse::RemoteEnvironment>(
            server.substr(0, colon),
            static_cast<std::uint16_t>(std::stoi(server.substr(colon + 1))));
      }
      const tesse::EvalReport report = tesse::evaluate(eopt, factory, *env);
      if (!csv_out.empty()) write_file(csv_out, tesse::report_csv(report));
      if (!json_out.empty()) write_file(json_out, tesse::report_json(report).dump(2) + "\n");
      if (!quiet) print_summary(report);
      return report.aborted.empty() ? 0 : 3;
    }
    if (*scene) {
      const std::string text = tesse::scene_to_json(tesse::generate_scene(scene_seed));
      if (scene_out.empty()) {
        std::cout << text << "\n";
      } else {
        write_file(scene_out, text);
      }
      return 0;
    }
    if (*mesh) {
      const auto world = load_world(mesh_seed, mesh_file);
      const auto format = tesse::mesh_format_from_string(mesh_format);
      write_file(mesh_out, tesse::export_mesh(world, format));
      if (format == tesse::MeshFormat::kObj) {
        const auto dir = std::filesystem::path(mesh_out).parent_path();
        write_file((dir / "tesse_classes.mtl").string(), tesse::obj_material_library());
      }
      return 0;
    }
    if (*validate) {
      const auto world = tesse::scene_from_json(read_file(validate_file));
      const auto violations = tesse::validate_scene(world);
      for (const auto& v : violations) std::printf("%s\n", v.message.c_str());
      if (violations.empty()) std::printf("ok %s\n", tesse::scene_digest(world).c_str());
      return violations.empty() ? 0 : 1;
    }
    if (*rescore) {
      const auto log = tesse::event_log_from_jsonl(read_file(log_file));
      std::cout << tesse::result_to_json(tesse::rescore(log)).dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
