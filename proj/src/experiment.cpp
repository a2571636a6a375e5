// SPDX-License-Identifier: Apache-2.0
#include "semfuse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "semfuse/fusion.hpp"
#include "semfuse/json_io.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/wire.hpp"

namespace semfuse {

using nlohmann::json;

namespace {

// Seed stream tags for derive_seed. Every random choice in an experiment
// hangs off master_seed through exactly one of these.
constexpr std::uint64_t kPlanStream = 0x10;
constexpr std::uint64_t kObserveStream = 0x20;
constexpr std::uint64_t kModelStream = 0x30;
constexpr std::uint64_t kSubsetStream = 0x40;

struct Snapshot {
  int observations = 0;
  std::vector<TopicDescriptor> descriptors;
  LocalSemanticMap map;
};

struct RobotRun {
  int robot_id = 0;
  std::vector<Snapshot> snapshots;  // checkpoint cadence, final included
};

void run_tasks(int threads, int count, const std::function<void(int)>& task) {
  if (threads <= 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

RobotRun simulate_robot(const Environment& env, const std::vector<TrajectoryStep>& traj,
                        int robot_id, const TopicModelConfig& model_cfg,
                        std::uint64_t observe_seed, int words_per_obs,
                        int checkpoint_interval) {
  TopicModel model(robot_id, env.map.grid, model_cfg);
  RobotRun run;
  run.robot_id = robot_id;
  const int total = static_cast<int>(traj.size());
  for (int i = 0; i < total; ++i) {
    const ObservationFrame frame =
        observe(env.map, env.emission, traj[i].cell, words_per_obs, observe_seed,
                robot_id, traj[i].timestep);
    model.ingest(frame);
    const bool at_checkpoint =
        checkpoint_interval > 0 && (i + 1) % checkpoint_interval == 0;
    if (at_checkpoint || i + 1 == total) {
      run.snapshots.push_back({i + 1, model.descriptors(), model.local_map()});
    }
  }
  return run;
}

const Snapshot& snapshot_at(const RobotRun& run, int observations) {
  for (const Snapshot& s : run.snapshots) {
    if (s.observations == observations) return s;
  }
  throw std::logic_error("missing snapshot");
}

ResultRecord score_fusion(const ExperimentConfig& config, const Environment& env,
                          const std::vector<const Snapshot*>& snapshots,
                          const std::vector<int>& robot_ids,
                          const AlgorithmSpec& spec) {
  std::vector<RobotDescriptors> team;
  std::vector<LocalSemanticMap> maps;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    team.push_back({robot_ids[i], snapshots[i]->descriptors});
    maps.push_back(snapshots[i]->map);
    maps.back().robot_id = robot_ids[i];
  }
  const ClusterAssignment assignment = run_matching(spec, team, config.sigma);
  const GlobalSemanticMap fused = fuse_maps(maps, assignment, env.map.grid);
  const ContingencyTable table = contingency(env.map, fused);

  ResultRecord rec;
  rec.env = env.config.name;
  rec.algorithm = spec.algorithm;
  rec.metric = spec.metric;
  rec.ami_score = ami(table);
  rec.coverage = fused.coverage_fraction();
  return rec;
}

struct Stats {
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

Stats compute_stats(const std::vector<double>& xs) {
  Stats s;
  s.n = static_cast<int>(xs.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double sq = 0.0;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(sq / (s.n - 1));
  }
  return s;
}

std::string csv_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void write_trend_section(std::ostream& os, const std::vector<ResultRecord>& records,
                         bool by_observations) {
  os << "env,algorithm,metric," << (by_observations ? "observations_ingested" : "num_robots")
     << ",n,mean_ami,std_ami,ci95_lo,ci95_hi\n";
  // key: (env, algorithm, metric, x)
  std::map<std::tuple<std::string, std::string, std::string, int>, std::vector<double>> groups;
  for (const ResultRecord& r : records) {
    const bool trajectory = r.phase == "trajectory";
    if (by_observations != trajectory) continue;
    const int x = by_observations ? r.observations_ingested : r.num_robots;
    groups[{r.env, r.algorithm, r.metric, x}].push_back(r.ami_score);
  }
  for (const auto& [key, values] : groups) {
    const auto& [env, algorithm, metric, x] = key;
    const Stats s = compute_stats(values);
    os << env << ',' << algorithm << ',' << metric << ',' << x << ',' << s.n << ','
       << csv_double(s.mean) << ',';
    if (s.n > 1) {
      const double half = 1.96 * s.stddev / std::sqrt(static_cast<double>(s.n));
      os << csv_double(s.stddev) << ',' << csv_double(s.mean - half) << ','
         << csv_double(s.mean + half);
    } else {
      os << ",,";  // degenerate interval: a single repetition
    }
    os << '\n';
  }
}

}  // namespace

std::vector<AlgorithmSpec> default_algorithms() {
  return {{"clear", "to"},      {"clear", "cosine"}, {"hungarian", "l1"},
          {"hungarian", "l2"},  {"hungarian", "cosine"}, {"id", ""}};
}

void validate(const ExperimentConfig& config) {
  if (config.num_robots < 1) throw ConfigError("num_robots must be >= 1");
  if (config.observations_per_robot < 1) {
    throw ConfigError("observations_per_robot must be >= 1");
  }
  if (config.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (!(config.sigma > 0.0 && config.sigma < 1.0)) {
    throw ConfigError("sigma must lie in (0, 1)");
  }
  if (config.words_per_obs < 1) throw ConfigError("words_per_obs must be >= 1");
  if (config.checkpoint_interval < 0) {
    throw ConfigError("checkpoint_interval must be >= 0");
  }
  for (int s : config.subset_sizes) {
    if (s < 1 || s > config.num_robots) {
      throw ConfigError("subset sizes must lie in [1, num_robots]");
    }
  }
  if (config.algorithms.empty()) throw ConfigError("no matching algorithms selected");
  for (const AlgorithmSpec& spec : config.algorithms) {
    if (spec.algorithm == "clear") {
      similarity_metric_from_string(spec.metric);
    } else if (spec.algorithm == "hungarian") {
      assignment_cost_from_string(spec.metric);
    } else if (spec.algorithm != "id") {
      throw ConfigError("unknown matching algorithm: " + spec.algorithm);
    }
  }
  if (config.model.alpha <= 0 || config.model.beta <= 0 || config.model.gamma <= 0) {
    throw ConfigError("model hyperparameters must be > 0");
  }
}

ClusterAssignment run_matching(const AlgorithmSpec& spec,
                               const std::vector<RobotDescriptors>& robots,
                               double sigma) {
  if (spec.algorithm == "clear") {
    const SimilarityMatrix sim =
        pairwise_similarity_matrix(robots, similarity_metric_from_string(spec.metric));
    ClusterAssignment a = clear_rectify(build_association_graph(sim, sigma));
    a.metric = spec.metric;
    return a;
  }
  if (spec.algorithm == "hungarian") {
    return hungarian_sequential_match(robots, assignment_cost_from_string(spec.metric));
  }
  if (spec.algorithm == "id" || spec.algorithm == "single_robot") {
    std::vector<std::pair<int, int>> counts;
    for (const RobotDescriptors& r : robots) {
      counts.emplace_back(r.robot_id, static_cast<int>(r.descriptors.size()));
    }
    ClusterAssignment a = id_based_match(counts);
    a.algorithm = spec.algorithm;
    return a;
  }
  throw ConfigError("unknown matching algorithm: " + spec.algorithm);
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config_in) {
  ExperimentConfig config = config_in;
  validate(config);
  config.model.vocabulary_size = config.env.vocabulary_size;
  if (config.subset_sizes.empty()) {
    for (int s = 1; s <= config.num_robots; ++s) config.subset_sizes.push_back(s);
  }

  const Environment env = make_environment(config.env);
  const std::uint64_t chash = experiment_config_hash(config);

  const TrajectoryPlan plan = plan_coverage_trajectories(
      env.map, config.num_robots, config.observations_per_robot,
      derive_seed(config.master_seed, kPlanStream));
  // Equal-area single robot: same sweep, the whole grid, N times the budget.
  TrajectoryPlan single_plan;
  if (config.single_robot_baseline) {
    single_plan = plan_coverage_trajectories(
        env.map, 1, config.num_robots * config.observations_per_robot,
        derive_seed(config.master_seed, kPlanStream));
  }

  std::vector<ResultRecord> records;

  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t observe_seed =
        derive_seed(config.master_seed, kObserveStream, static_cast<std::uint64_t>(rep));

    // Simulate the team (and the single-robot baseline) in parallel; each
    // robot's stream is independent, so scheduling cannot change results.
    const int num_sims = config.num_robots + (config.single_robot_baseline ? 1 : 0);
    std::vector<RobotRun> runs(num_sims);
    run_tasks(config.threads, num_sims, [&](int i) {
      if (i < config.num_robots) {
        TopicModelConfig cfg = config.model;
        cfg.seed = derive_seed(config.master_seed, kModelStream,
                               static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(i));
        runs[i] = simulate_robot(env, plan.robots[i], i, cfg, observe_seed,
                                 config.words_per_obs, config.checkpoint_interval);
      } else {
        TopicModelConfig cfg = config.model;
        cfg.seed = derive_seed(config.master_seed, kModelStream,
                               static_cast<std::uint64_t>(rep), 0xFFFF);
        runs[i] = simulate_robot(env, single_plan.robots[0], config.num_robots, cfg,
                                 derive_seed(observe_seed, 0xFFFF), config.words_per_obs,
                                 config.observations_per_robot);
      }
    });

    const std::uint64_t rep_model_seed =
        derive_seed(config.master_seed, kModelStream, static_cast<std::uint64_t>(rep));

    // Final-state fusion of random subsets of every requested size.
    for (int size : config.subset_sizes) {
      Rng subset_rng(derive_seed(config.master_seed, kSubsetStream,
                                 static_cast<std::uint64_t>(rep),
                                 static_cast<std::uint64_t>(size)));
      std::vector<int> subset = subset_rng.sample_without_replacement(config.num_robots, size);
      std::sort(subset.begin(), subset.end());

      std::vector<const Snapshot*> snaps;
      for (int r : subset) {
        snaps.push_back(&snapshot_at(runs[r], config.observations_per_robot));
      }
      for (const AlgorithmSpec& spec : config.algorithms) {
        ResultRecord rec = score_fusion(config, env, snaps, subset, spec);
        rec.phase = "final";
        rec.num_robots = size;
        rec.repetition = rep;
        rec.observations_ingested = config.observations_per_robot;
        rec.config_hash = chash;
        rec.seed = rep_model_seed;
        records.push_back(std::move(rec));
      }

      if (config.single_robot_baseline) {
        const Snapshot& snap =
            snapshot_at(runs[config.num_robots], size * config.observations_per_robot);
        std::vector<const Snapshot*> one{&snap};
        std::vector<int> ids{config.num_robots};
        ResultRecord rec = score_fusion(config, env, one, ids, {"single_robot", ""});
        rec.phase = "single_robot";
        rec.num_robots = size;
        rec.repetition = rep;
        rec.observations_ingested = size * config.observations_per_robot;
        rec.config_hash = chash;
        rec.seed = rep_model_seed;
        records.push_back(std::move(rec));
      }
    }

    // Full-team fusion at every checkpoint: the map-quality-over-time trend.
    if (config.checkpoint_interval > 0) {
      std::vector<int> all_ids(config.num_robots);
      for (int r = 0; r < config.num_robots; ++r) all_ids[r] = r;
      for (int obs = config.checkpoint_interval; obs <= config.observations_per_robot;
           obs += config.checkpoint_interval) {
        std::vector<const Snapshot*> snaps;
        for (int r = 0; r < config.num_robots; ++r) {
          snaps.push_back(&snapshot_at(runs[r], obs));
        }
        for (const AlgorithmSpec& spec : config.algorithms) {
          ResultRecord rec = score_fusion(config, env, snaps, all_ids, spec);
          rec.phase = "trajectory";
          rec.num_robots = config.num_robots;
          rec.repetition = rep;
          rec.observations_ingested = obs;
          rec.config_hash = chash;
          rec.seed = rep_model_seed;
          records.push_back(std::move(rec));
        }
      }
    }

    if (!config.output_dir.empty() && config.save_payloads && rep == 0) {
      namespace fs = std::filesystem;
      fs::create_directories(config.output_dir);
      for (int r = 0; r < config.num_robots; ++r) {
        const Snapshot& snap = snapshot_at(runs[r], config.observations_per_robot);
        const std::vector<std::uint8_t> payload = encode_map_payload(
            snap.map, snap.descriptors, env.map.grid, config.observations_per_robot);
        std::ostringstream name;
        name << config.output_dir << "/robot_" << r << ".payload";
        std::ofstream os(name.str(), std::ios::binary);
        os.write(reinterpret_cast<const char*>(payload.data()),
                 static_cast<std::streamsize>(payload.size()));
      }
      std::vector<const Snapshot*> snaps;
      std::vector<int> all_ids;
      for (int r = 0; r < config.num_robots; ++r) {
        snaps.push_back(&snapshot_at(runs[r], config.observations_per_robot));
        all_ids.push_back(r);
      }
      for (const AlgorithmSpec& spec : config.algorithms) {
        std::vector<RobotDescriptors> team;
        std::vector<LocalSemanticMap> maps;
        for (std::size_t i = 0; i < snaps.size(); ++i) {
          team.push_back({all_ids[i], snaps[i]->descriptors});
          maps.push_back(snaps[i]->map);
        }
        const ClusterAssignment assignment = run_matching(spec, team, config.sigma);
        const GlobalSemanticMap fused = fuse_maps(maps, assignment, env.map.grid);
        std::ostringstream base;
        base << config.output_dir << "/fused_" << spec.algorithm;
        if (!spec.metric.empty()) base << '_' << spec.metric;
        {
          std::ofstream os(base.str() + ".csv");
          write_global_map_csv(os, fused);
        }
        {
          std::ofstream os(base.str() + ".ppm", std::ios::binary);
          write_global_map_ppm(os, fused);
        }
      }
    }
  }

  if (!config.output_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);
    save_json(config.output_dir + "/config.json", experiment_config_to_json(config));
    save_json(config.output_dir + "/env.json", environment_to_json(env));
    {
      std::ofstream os(config.output_dir + "/truth.ppm", std::ios::binary);
      write_ground_truth_ppm(os, env.map);
    }
    {
      std::ofstream os(config.output_dir + "/records.jsonl");
      write_records_jsonl(os, records);
    }
    {
      std::ofstream os(config.output_dir + "/summary.csv");
      write_summary_csv(os, records, config.num_robots);
    }
    {
      std::ofstream robots_csv(config.output_dir + "/trend_robots.csv");
      std::ofstream obs_csv(config.output_dir + "/trend_observations.csv");
      emit_trend_data(records, robots_csv, obs_csv);
    }
  }
  return records;
}

void emit_trend_data(const std::vector<ResultRecord>& records,
                     std::ostream& by_num_robots, std::ostream& by_observations) {
  if (records.empty()) throw std::invalid_argument("no records");
  write_trend_section(by_num_robots, records, false);
  write_trend_section(by_observations, records, true);
}

void write_summary_csv(std::ostream& os, const std::vector<ResultRecord>& records,
                       int team_size) {
  os << "env,algorithm,metric,num_robots,repetitions,mean_ami,std_ami,mean_coverage\n";
  std::map<std::tuple<std::string, std::string, std::string>,
           std::pair<std::vector<double>, std::vector<double>>>
      groups;
  for (const ResultRecord& r : records) {
    if (r.num_robots != team_size) continue;
    if (r.phase != "final" && r.phase != "single_robot") continue;
    auto& [amis, covs] = groups[{r.env, r.algorithm, r.metric}];
    amis.push_back(r.ami_score);
    covs.push_back(r.coverage);
  }
  for (const auto& [key, values] : groups) {
    const auto& [env, algorithm, metric] = key;
    const Stats s = compute_stats(values.first);
    const Stats c = compute_stats(values.second);
    os << env << ',' << algorithm << ',' << metric << ',' << team_size << ',' << s.n
       << ',' << csv_double(s.mean) << ',' << csv_double(s.stddev) << ','
       << csv_double(c.mean) << '\n';
  }
}

void write_records_jsonl(std::ostream& os, const std::vector<ResultRecord>& records) {
  for (const ResultRecord& r : records) {
    json j{{"env", r.env},
           {"algorithm", r.algorithm},
           {"metric", r.metric},
           {"phase", r.phase},
           {"num_robots", r.num_robots},
           {"repetition", r.repetition},
           {"observations_ingested", r.observations_ingested},
           {"ami", r.ami_score},
           {"coverage_fraction", r.coverage},
           {"config_hash", r.config_hash},
           {"seed", r.seed}};
    os << j.dump() << '\n';
  }
}

std::vector<ResultRecord> read_records_jsonl(std::istream& is) {
  std::vector<ResultRecord> records;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    ResultRecord r;
    r.env = j.at("env").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.metric = j.at("metric").get<std::string>();
    r.phase = j.at("phase").get<std::string>();
    r.num_robots = j.at("num_robots").get<int>();
    r.repetition = j.at("repetition").get<int>();
    r.observations_ingested = j.at("observations_ingested").get<int>();
    r.ami_score = j.at("ami").get<double>();
    r.coverage = j.at("coverage_fraction").get<double>();
    r.config_hash = j.at("config_hash").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    records.push_back(std::move(r));
  }
  return records;
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json algorithms = json::array();
  for (const AlgorithmSpec& a : c.algorithms) {
    algorithms.push_back({{"algorithm", a.algorithm}, {"metric", a.metric}});
  }
  return json{
      {"env",
       {{"preset", c.env.name},
        {"seed", c.env.seed},
        {"grid", {{"width", c.env.grid.width}, {"height", c.env.grid.height},
                  {"cell_size", c.env.grid.cell_size}}},
        {"num_classes", c.env.num_classes},
        {"patchiness", c.env.patchiness},
        {"vocabulary_size", c.env.vocabulary_size},
        {"noise_mix", c.env.noise_mix},
        {"words_per_class", c.env.words_per_class}}},
      {"num_robots", c.num_robots},
      {"observations_per_robot", c.observations_per_robot},
      {"repetitions", c.repetitions},
      {"subset_sizes", c.subset_sizes},
      {"algorithms", std::move(algorithms)},
      {"sigma", c.sigma},
      {"model",
       {{"alpha", c.model.alpha},
        {"beta", c.model.beta},
        {"gamma", c.model.gamma},
        {"neighborhood_radius", c.model.neighborhood_radius},
        {"refine_sweeps_per_frame", c.model.refine_sweeps_per_frame},
        {"refine_window", c.model.refine_window}}},
      {"words_per_obs", c.words_per_obs},
      {"checkpoint_interval", c.checkpoint_interval},
      {"single_robot_baseline", c.single_robot_baseline},
      {"master_seed", c.master_seed},
      {"threads", c.threads},
      {"output_dir", c.output_dir},
      {"save_payloads", c.save_payloads}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("env")) {
    const json& e = j.at("env");
    const std::string preset = e.value("preset", "custom");
    if (preset == "env1" || preset == "env2") {
      c.env = preset_config(preset);
    } else {
      c.env.name = preset;
    }
    if (e.contains("seed")) c.env.seed = e.at("seed").get<std::uint64_t>();
    if (e.contains("grid")) {
      c.env.grid.width = e.at("grid").value("width", c.env.grid.width);
      c.env.grid.height = e.at("grid").value("height", c.env.grid.height);
      c.env.grid.cell_size = e.at("grid").value("cell_size", c.env.grid.cell_size);
    }
    c.env.num_classes = e.value("num_classes", c.env.num_classes);
    c.env.patchiness = e.value("patchiness", c.env.patchiness);
    c.env.vocabulary_size = e.value("vocabulary_size", c.env.vocabulary_size);
    c.env.noise_mix = e.value("noise_mix", c.env.noise_mix);
    c.env.words_per_class = e.value("words_per_class", c.env.words_per_class);
  }
  c.num_robots = j.value("num_robots", c.num_robots);
  c.observations_per_robot = j.value("observations_per_robot", c.observations_per_robot);
  c.repetitions = j.value("repetitions", c.repetitions);
  c.subset_sizes = j.value("subset_sizes", c.subset_sizes);
  if (j.contains("algorithms")) {
    c.algorithms.clear();
    for (const json& a : j.at("algorithms")) {
      c.algorithms.push_back({a.at("algorithm").get<std::string>(),
                              a.value("metric", std::string())});
    }
  }
  c.sigma = j.value("sigma", c.sigma);
  if (j.contains("model")) {
    const json& m = j.at("model");
    c.model.alpha = m.value("alpha", c.model.alpha);
    c.model.beta = m.value("beta", c.model.beta);
    c.model.gamma = m.value("gamma", c.model.gamma);
    c.model.neighborhood_radius = m.value("neighborhood_radius", c.model.neighborhood_radius);
    c.model.refine_sweeps_per_frame =
        m.value("refine_sweeps_per_frame", c.model.refine_sweeps_per_frame);
    c.model.refine_window = m.value("refine_window", c.model.refine_window);
  }
  c.words_per_obs = j.value("words_per_obs", c.words_per_obs);
  c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
  c.single_robot_baseline = j.value("single_robot_baseline", c.single_robot_baseline);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.threads = j.value("threads", c.threads);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.save_payloads = j.value("save_payloads", c.save_payloads);
  return c;
}

std::uint64_t experiment_config_hash(const ExperimentConfig& config) {
  // FNV-1a over the canonical JSON form, with the fields that cannot affect
  // results (output location, parallelism) removed.
  nlohmann::json j = experiment_config_to_json(config);
  j.erase("output_dir");
  j.erase("save_payloads");
  j.erase("threads");
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace semfuse
