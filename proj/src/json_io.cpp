// SPDX-License-Identifier: Apache-2.0
#include "semfuse/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace semfuse {

using nlohmann::json;

namespace {

constexpr int kEnvironmentVersion = 1;
constexpr int kPlanVersion = 1;
constexpr int kAssignmentVersion = 1;
constexpr int kCheckpointVersion = 1;

void require_version(const json& j, int expected, const char* what) {
  if (!j.contains("format_version") || j.at("format_version").get<int>() != expected) {
    throw std::runtime_error(std::string("unsupported ") + what + " document version");
  }
}

}  // namespace

json environment_to_json(const Environment& env) {
  json j;
  j["format_version"] = kEnvironmentVersion;
  j["preset"] = env.config.name;
  j["seed"] = env.config.seed;
  j["grid"] = {{"width", env.config.grid.width},
               {"height", env.config.grid.height},
               {"cell_size", env.config.grid.cell_size}};
  j["num_classes"] = env.config.num_classes;
  j["patchiness"] = env.config.patchiness;
  j["vocabulary_size"] = env.config.vocabulary_size;
  j["noise_mix"] = env.config.noise_mix;
  j["words_per_class"] = env.config.words_per_class;
  j["labels"] = env.map.labels;  // row-major
  return j;
}

Environment environment_from_json(const json& j) {
  require_version(j, kEnvironmentVersion, "environment");
  EnvironmentConfig config;
  config.name = j.at("preset").get<std::string>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.grid.width = j.at("grid").at("width").get<int>();
  config.grid.height = j.at("grid").at("height").get<int>();
  config.grid.cell_size = j.at("grid").at("cell_size").get<double>();
  config.num_classes = j.at("num_classes").get<int>();
  config.patchiness = j.at("patchiness").get<double>();
  config.vocabulary_size = j.at("vocabulary_size").get<int>();
  config.noise_mix = j.at("noise_mix").get<double>();
  config.words_per_class = j.at("words_per_class").get<int>();

  Environment env = make_environment(config);
  const auto stored = j.at("labels").get<std::vector<int>>();
  if (stored != env.map.labels) {
    throw std::runtime_error("stored labels do not match regenerated environment");
  }
  return env;
}

json plan_to_json(const TrajectoryPlan& plan) {
  json robots = json::array();
  for (const auto& traj : plan.robots) {
    json steps = json::array();
    for (const TrajectoryStep& s : traj) steps.push_back({s.cell, s.timestep});
    robots.push_back(std::move(steps));
  }
  return json{{"format_version", kPlanVersion},
              {"observations_per_robot", plan.observations_per_robot},
              {"robots", std::move(robots)}};
}

TrajectoryPlan plan_from_json(const json& j) {
  require_version(j, kPlanVersion, "plan");
  TrajectoryPlan plan;
  plan.observations_per_robot = j.at("observations_per_robot").get<int>();
  for (const json& steps : j.at("robots")) {
    std::vector<TrajectoryStep> traj;
    for (const json& s : steps) {
      traj.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
    }
    plan.robots.push_back(std::move(traj));
  }
  return plan;
}

json assignment_to_json(const ClusterAssignment& assignment) {
  json entries = json::array();
  for (std::size_t i = 0; i < assignment.registry.size(); ++i) {
    entries.push_back({assignment.registry[i].robot_id,
                       assignment.registry[i].topic_id, assignment.labels[i]});
  }
  return json{{"format_version", kAssignmentVersion},
              {"num_global_labels", assignment.num_global_labels},
              {"assignments", std::move(entries)},
              {"algorithm", assignment.algorithm},
              {"metric", assignment.metric},
              {"sigma", assignment.sigma}};
}

ClusterAssignment assignment_from_json(const json& j) {
  require_version(j, kAssignmentVersion, "assignment");
  ClusterAssignment a;
  a.num_global_labels = j.at("num_global_labels").get<int>();
  a.algorithm = j.at("algorithm").get<std::string>();
  a.metric = j.at("metric").get<std::string>();
  a.sigma = j.at("sigma").get<double>();
  for (const json& e : j.at("assignments")) {
    a.registry.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    a.labels.push_back(e.at(2).get<int>());
  }
  return a;
}

json checkpoint_to_json(const TopicModel& model) {
  json frames = json::array();
  for (const TopicModel::Frame& f : model.frames()) {
    frames.push_back({{"cell", f.cell},
                      {"timestep", f.timestep},
                      {"words", f.words},
                      {"topics", f.topics}});
  }
  const TopicModelConfig& cfg = model.config();
  return json{{"format_version", kCheckpointVersion},
              {"robot_id", model.robot_id()},
              {"grid",
               {{"width", model.grid().width},
                {"height", model.grid().height},
                {"cell_size", model.grid().cell_size}}},
              {"config",
               {{"alpha", cfg.alpha},
                {"beta", cfg.beta},
                {"gamma", cfg.gamma},
                {"vocabulary_size", cfg.vocabulary_size},
                {"neighborhood_radius", cfg.neighborhood_radius},
                {"refine_sweeps_per_frame", cfg.refine_sweeps_per_frame},
                {"refine_window", cfg.refine_window},
                {"seed", cfg.seed}}},
              {"rng_state", model.rng_state()},
              {"frames", std::move(frames)}};
}

TopicModel checkpoint_from_json(const json& j) {
  require_version(j, kCheckpointVersion, "checkpoint");
  GridSpec grid{j.at("grid").at("width").get<int>(),
                j.at("grid").at("height").get<int>(),
                j.at("grid").at("cell_size").get<double>()};
  const json& c = j.at("config");
  TopicModelConfig cfg;
  cfg.alpha = c.at("alpha").get<double>();
  cfg.beta = c.at("beta").get<double>();
  cfg.gamma = c.at("gamma").get<double>();
  cfg.vocabulary_size = c.at("vocabulary_size").get<int>();
  cfg.neighborhood_radius = c.at("neighborhood_radius").get<int>();
  cfg.refine_sweeps_per_frame = c.at("refine_sweeps_per_frame").get<int>();
  cfg.refine_window = c.at("refine_window").get<int>();
  cfg.seed = c.at("seed").get<std::uint64_t>();

  std::vector<TopicModel::Frame> frames;
  for (const json& f : j.at("frames")) {
    TopicModel::Frame frame;
    frame.cell = f.at("cell").get<int>();
    frame.timestep = f.at("timestep").get<int>();
    frame.words = f.at("words").get<std::vector<int>>();
    frame.topics = f.at("topics").get<std::vector<int>>();
    frames.push_back(std::move(frame));
  }
  return TopicModel::restore(j.at("robot_id").get<int>(), grid, cfg, frames,
                             j.at("rng_state").get<std::string>());
}

void save_json(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << j.dump(2) << '\n';
}

json load_json(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return json::parse(is);
}

}  // namespace semfuse
