// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "semfuse/matching.hpp"
#include "semfuse/metrics.hpp"
#include "semfuse/topic_model.hpp"
#include "semfuse/world.hpp"

namespace semfuse {

/// Config problems detected before an experiment starts. The CLI maps this
/// to exit code 1, runtime failures to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One matching algorithm plus its metric: {"clear", "to"|"cosine"},
/// {"hungarian", "l1"|"l2"|"cosine"}, {"id", ""}.
struct AlgorithmSpec {
  std::string algorithm;
  std::string metric;
};

std::vector<AlgorithmSpec> default_algorithms();

struct ExperimentConfig {
  EnvironmentConfig env = env1_config();
  int num_robots = 12;
  int observations_per_robot = 250;
  int repetitions = 24;
  std::vector<int> subset_sizes;  // empty means 1..num_robots
  std::vector<AlgorithmSpec> algorithms = default_algorithms();
  double sigma = kDefaultSigma;
  TopicModelConfig model;  // vocabulary_size is synced to the environment
  int words_per_obs = 50;
  int checkpoint_interval = 25;  // fuse-all cadence for the time trend; 0 disables
  bool single_robot_baseline = true;
  std::uint64_t master_seed = 7;
  int threads = 0;  // 0 picks hardware concurrency
  std::string output_dir;  // empty disables file output
  bool save_payloads = false;  // write repetition-0 wire payloads and fused maps
};

/// One scored fusion. `phase` is "final" for the end-of-run subset records,
/// "trajectory" for the fuse-all-robots checkpoints, and "single_robot" for
/// the equal-area single robot baseline.
struct ResultRecord {
  std::string env;
  std::string algorithm;
  std::string metric;
  std::string phase;
  int num_robots = 0;
  int repetition = 0;
  int observations_ingested = 0;
  double ami_score = 0.0;
  double coverage = 0.0;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;  // model seed stream for this repetition
};

/// Runs the full protocol: per repetition, simulate every robot online (in
/// parallel), snapshot models at checkpoints, fuse random robot subsets of
/// each requested size with every algorithm, and score against ground
/// truth. Deterministic for a fixed config: all seeds derive from
/// master_seed via the documented splitting rule. When output_dir is set,
/// writes config.json, env.json, records.jsonl, summary.csv,
/// trend_robots.csv and trend_observations.csv (plus payloads and rendered
/// maps when save_payloads is on).
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config);

void validate(const ExperimentConfig& config);

/// Applies one algorithm to a set of descriptor sets.
ClusterAssignment run_matching(const AlgorithmSpec& spec,
                               const std::vector<RobotDescriptors>& robots,
                               double sigma);

/// Mean/std/95% CI rows, grouped over repetitions: by fused-team size (from
/// "final" and "single_robot" records) and by observations ingested (from
/// "trajectory" records). A group with a single record gets blank std/CI
/// columns.
void emit_trend_data(const std::vector<ResultRecord>& records,
                     std::ostream& by_num_robots, std::ostream& by_observations);

/// Mean AMI (std dev) per algorithm/metric at full team size.
void write_summary_csv(std::ostream& os, const std::vector<ResultRecord>& records,
                       int team_size);

void write_records_jsonl(std::ostream& os, const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_records_jsonl(std::istream& is);

nlohmann::json experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

std::uint64_t experiment_config_hash(const ExperimentConfig& config);

}  // namespace semfuse
