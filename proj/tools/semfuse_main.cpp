// SPDX-License-Identifier: Apache-2.0
//
// semfuse: multi-robot semantic mapping experiments.
//
// Subcommands:
//   gen-env  generate an environment JSON (plus PPM rendering)
//   run      run the full experiment protocol, writing records and CSVs
//   fuse     fuse robot payload files into a global map
//   score    score a fused map CSV against an environment's ground truth
//   trend    recompute trend CSVs from a records.jsonl
//
// Exit codes: 0 ok, 1 config error, 2 runtime error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <vector>

#include "semfuse/experiment.hpp"
#include "semfuse/fusion.hpp"
#include "semfuse/json_io.hpp"
#include "semfuse/metrics.hpp"
#include "semfuse/wire.hpp"

namespace {

using namespace semfuse;
using nlohmann::json;

void add_env_options(CLI::App* cmd, EnvironmentConfig& env, std::string& preset) {
  cmd->add_option("--preset", preset, "Environment preset: env1 or env2");
  cmd->add_option("--env-seed", env.seed, "Environment generator seed");
  cmd->add_option("--width", env.grid.width, "Grid width in cells");
  cmd->add_option("--height", env.grid.height, "Grid height in cells");
  cmd->add_option("--classes", env.num_classes, "Number of ground-truth classes");
  cmd->add_option("--patchiness", env.patchiness, "Mean patch diameter in cells");
  cmd->add_option("--vocabulary", env.vocabulary_size, "Vocabulary size V");
  cmd->add_option("--noise-mix", env.noise_mix, "Uniform noise fraction in emissions");
  cmd->add_option("--words-per-class", env.words_per_class, "Support words per class");
}

EnvironmentConfig resolve_env(const EnvironmentConfig& flags, const std::string& preset,
                              const CLI::App* cmd) {
  if (preset.empty()) return flags;
  EnvironmentConfig env = preset_config(preset);
  // Explicit flags override the preset.
  if (cmd->count("--env-seed")) env.seed = flags.seed;
  if (cmd->count("--width")) env.grid.width = flags.grid.width;
  if (cmd->count("--height")) env.grid.height = flags.grid.height;
  if (cmd->count("--classes")) env.num_classes = flags.num_classes;
  if (cmd->count("--patchiness")) env.patchiness = flags.patchiness;
  if (cmd->count("--vocabulary")) env.vocabulary_size = flags.vocabulary_size;
  if (cmd->count("--noise-mix")) env.noise_mix = flags.noise_mix;
  if (cmd->count("--words-per-class")) env.words_per_class = flags.words_per_class;
  return env;
}

int cmd_gen_env(const EnvironmentConfig& env_cfg, const std::string& out, int plan_robots,
                int plan_observations, std::uint64_t plan_seed) {
  const Environment env = make_environment(env_cfg);
  save_json(out, environment_to_json(env));
  const std::string stem = out.substr(0, out.find_last_of('.'));
  {
    std::ofstream os(stem + ".ppm", std::ios::binary);
    write_ground_truth_ppm(os, env.map);
  }
  std::cout << "wrote " << out << " and " << stem << ".ppm" << '\n';
  if (plan_robots > 0) {
    const TrajectoryPlan plan =
        plan_coverage_trajectories(env.map, plan_robots, plan_observations, plan_seed);
    save_json(stem + ".plan.json", plan_to_json(plan));
    std::cout << "wrote " << stem << ".plan.json" << '\n';
  }
  return 0;
}

int cmd_run(const ExperimentConfig& config) {
  const std::vector<ResultRecord> records = run_experiment(config);
  std::cout << "wrote " << records.size() << " records to " << config.output_dir << '\n';
  write_summary_csv(std::cout, records, config.num_robots);
  return 0;
}

int cmd_fuse(const std::vector<std::string>& payload_paths, const std::string& algorithm,
             const std::string& metric, double sigma, const std::string& out_prefix) {
  std::vector<RobotDescriptors> team;
  std::vector<LocalSemanticMap> maps;
  GridSpec grid;
  for (std::size_t i = 0; i < payload_paths.size(); ++i) {
    std::ifstream is(payload_paths[i], std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + payload_paths[i]);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    const MapPayload payload = decode_map_payload(bytes);
    if (i == 0) {
      grid = payload.grid;
    } else if (!(grid == payload.grid)) {
      throw std::runtime_error("payload grids differ");
    }
    team.push_back({payload.robot_id, payload.descriptors});
    maps.push_back(payload.map);
  }

  const ClusterAssignment assignment = run_matching({algorithm, metric}, team, sigma);
  const GlobalSemanticMap fused = fuse_maps(maps, assignment, grid);

  save_json(out_prefix + ".assignment.json", assignment_to_json(assignment));
  {
    std::ofstream os(out_prefix + ".csv");
    write_global_map_csv(os, fused);
  }
  {
    std::ofstream os(out_prefix + ".ppm", std::ios::binary);
    write_global_map_ppm(os, fused);
  }
  std::cout << "fused " << maps.size() << " maps into " << assignment.num_global_labels
            << " global labels; coverage " << fused.coverage_fraction() << '\n';
  return 0;
}

int cmd_score(const std::string& env_path, const std::string& fused_csv,
              const std::string& out) {
  const Environment env = environment_from_json(load_json(env_path));

  GlobalSemanticMap fused;
  fused.grid = env.map.grid;
  fused.labels.assign(env.map.grid.cell_count(), -1);
  std::ifstream is(fused_csv);
  if (!is) throw std::runtime_error("cannot open: " + fused_csv);
  std::string line;
  int y = 0;
  int max_label = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    int x = 0;
    while (std::getline(ls, field, ',')) {
      if (y >= env.map.grid.height || x >= env.map.grid.width) {
        throw std::runtime_error("fused map larger than environment grid");
      }
      const int label = std::stoi(field);
      fused.labels[env.map.grid.cell_at(x, y)] = label;
      max_label = std::max(max_label, label);
      ++x;
    }
    if (x != env.map.grid.width) throw std::runtime_error("ragged fused map row");
    ++y;
  }
  if (y != env.map.grid.height) throw std::runtime_error("fused map height mismatch");
  fused.num_global_labels = max_label + 1;
  fused.source_robot.assign(env.map.grid.cell_count(), -1);
  fused.source_timestep.assign(env.map.grid.cell_count(), -1);

  const ContingencyTable table = contingency(env.map, fused);
  const json result{{"env", env.config.name},
                    {"ami", ami(table)},
                    {"mutual_information", mutual_information(table)},
                    {"coverage_fraction", fused.coverage_fraction()},
                    {"cells_scored", table.total}};
  if (out.empty()) {
    std::cout << result.dump(2) << '\n';
  } else {
    save_json(out, result);
  }
  return 0;
}

int cmd_trend(const std::string& records_path, const std::string& out_dir) {
  std::ifstream is(records_path);
  if (!is) throw std::runtime_error("cannot open: " + records_path);
  const std::vector<ResultRecord> records = read_records_jsonl(is);
  std::filesystem::create_directories(out_dir);
  std::ofstream robots_csv(out_dir + "/trend_robots.csv");
  std::ofstream obs_csv(out_dir + "/trend_observations.csv");
  emit_trend_data(records, robots_csv, obs_csv);
  std::cout << "wrote " << out_dir << "/trend_robots.csv and "
            << out_dir << "/trend_observations.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot unsupervised semantic mapping and map fusion"};
  app.require_subcommand(1);

  // gen-env
  auto* gen = app.add_subcommand("gen-env", "Generate an environment JSON");
  EnvironmentConfig gen_env_cfg;
  std::string gen_preset;
  std::string gen_out = "environment.json";
  int gen_plan_robots = 0;
  int gen_plan_observations = 250;
  std::uint64_t gen_plan_seed = 7;
  add_env_options(gen, gen_env_cfg, gen_preset);
  gen->add_option("-o,--output", gen_out, "Output JSON path");
  gen->add_option("--plan-robots", gen_plan_robots,
                  "Also write a coverage plan for this many robots");
  gen->add_option("--plan-observations", gen_plan_observations, "Frames per robot in the plan");
  gen->add_option("--plan-seed", gen_plan_seed, "Plan seed");

  // run
  auto* run = app.add_subcommand("run", "Run the experiment protocol");
  ExperimentConfig run_cfg;
  std::string run_preset = "env1";
  std::string run_config_path;
  std::vector<std::string> run_algorithms;
  run->add_option("--config", run_config_path, "Load an ExperimentConfig JSON file");
  add_env_options(run, run_cfg.env, run_preset);
  run->add_option("--robots", run_cfg.num_robots, "Team size");
  run->add_option("--observations", run_cfg.observations_per_robot, "Frames per robot");
  run->add_option("--repetitions", run_cfg.repetitions, "Protocol repetitions");
  run->add_option("--subset-sizes", run_cfg.subset_sizes, "Fused subset sizes (default 1..N)");
  run->add_option("--algorithms", run_algorithms,
                  "algorithm:metric pairs, e.g. clear:cosine hungarian:l2 id");
  run->add_option("--sigma", run_cfg.sigma, "Association graph threshold");
  run->add_option("--alpha", run_cfg.model.alpha, "Topic model alpha");
  run->add_option("--beta", run_cfg.model.beta, "Topic model beta");
  run->add_option("--gamma", run_cfg.model.gamma, "Topic model gamma");
  run->add_option("--radius", run_cfg.model.neighborhood_radius, "Spatial prior radius");
  run->add_option("--sweeps", run_cfg.model.refine_sweeps_per_frame, "Gibbs sweeps per frame");
  run->add_option("--window", run_cfg.model.refine_window, "Online refinement window");
  run->add_option("--words-per-obs", run_cfg.words_per_obs, "Words per observation");
  run->add_option("--checkpoint-interval", run_cfg.checkpoint_interval,
                  "Trend checkpoint cadence in frames (0 disables)");
  run->add_flag("--no-single-robot", "Skip the single robot baseline");
  run->add_option("--master-seed", run_cfg.master_seed, "Master seed");
  run->add_option("--threads", run_cfg.threads, "Worker threads (0 = hardware)");
  run->add_option("-o,--output-dir", run_cfg.output_dir, "Output directory")->required();
  run->add_flag("--save-payloads", run_cfg.save_payloads,
                "Write repetition-0 payloads and fused map renderings");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Fuse payload files into a global map");
  std::vector<std::string> fuse_payloads;
  std::string fuse_algorithm = "clear";
  std::string fuse_metric = "cosine";
  double fuse_sigma = kDefaultSigma;
  std::string fuse_out = "fused";
  fuse->add_option("payloads", fuse_payloads, "Robot payload files")->required();
  fuse->add_option("--algorithm", fuse_algorithm, "clear, hungarian or id");
  fuse->add_option("--metric", fuse_metric, "to/cosine (clear) or l1/l2/cosine (hungarian)");
  fuse->add_option("--sigma", fuse_sigma, "Association graph threshold");
  fuse->add_option("-o,--output-prefix", fuse_out, "Output path prefix");

  // score
  auto* score = app.add_subcommand("score", "Score a fused map against ground truth");
  std::string score_env, score_csv, score_out;
  score->add_option("--env", score_env, "Environment JSON")->required();
  score->add_option("--fused", score_csv, "Fused map CSV")->required();
  score->add_option("-o,--output", score_out, "Result JSON path (default stdout)");

  // trend
  auto* trend = app.add_subcommand("trend", "Recompute trend CSVs from records");
  std::string trend_records, trend_out = ".";
  trend->add_option("--records", trend_records, "records.jsonl path")->required();
  trend->add_option("-o,--output-dir", trend_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen_env(resolve_env(gen_env_cfg, gen_preset, gen), gen_out,
                         gen_plan_robots, gen_plan_observations, gen_plan_seed);
    }
    if (run->parsed()) {
      ExperimentConfig config = run_cfg;
      if (!run_config_path.empty()) {
        config = experiment_config_from_json(load_json(run_config_path));
        if (run->count("-o")) config.output_dir = run_cfg.output_dir;
      } else {
        config.env = resolve_env(run_cfg.env, run_preset, run);
        if (!run_algorithms.empty()) {
          config.algorithms.clear();
          for (const std::string& spec : run_algorithms) {
            const auto colon = spec.find(':');
            config.algorithms.push_back(
                {spec.substr(0, colon),
                 colon == std::string::npos ? "" : spec.substr(colon + 1)});
          }
        }
        if (run->count("--no-single-robot")) config.single_robot_baseline = false;
      }
      validate(config);
      return cmd_run(config);
    }
    if (fuse->parsed()) {
      return cmd_fuse(fuse_payloads, fuse_algorithm, fuse_metric, fuse_sigma, fuse_out);
    }
    if (score->parsed()) {
      return cmd_score(score_env, score_csv, score_out);
    }
    if (trend->parsed()) {
      return cmd_trend(trend_records, trend_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const CLI::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
