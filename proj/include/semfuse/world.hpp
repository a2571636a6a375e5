// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace semfuse {

/// Rectangular cell grid. Cells are indexed row-major: cell = y * width + x.
struct GridSpec {
  int width = 1;
  int height = 1;
  double cell_size = 1.0;

  int cell_count() const { return width * height; }
  bool contains(int cell) const { return cell >= 0 && cell < cell_count(); }
  int x_of(int cell) const { return cell % width; }
  int y_of(int cell) const { return cell / width; }
  int cell_at(int x, int y) const { return y * width + x; }
  bool operator==(const GridSpec&) const = default;
};

/// Ground-truth class id per cell, one dominant class per cell.
struct GroundTruthMap {
  GridSpec grid;
  std::vector<int> labels;  // row-major, one entry per cell
  int num_classes = 0;
};

/// Per-class categorical word distributions blended with a uniform noise
/// floor. Stands in for a feature-extraction front end: a cell of class c
/// emits words from (1 - noise_mix) * class_word_dist[c] + noise_mix / V.
struct LabelEmissionModel {
  int vocabulary_size = 0;
  double noise_mix = 0.0;  // in [0, 1)
  std::vector<std::vector<double>> class_word_dist;  // rows on the V-simplex

  int num_classes() const { return static_cast<int>(class_word_dist.size()); }
  double mixture(int cls, int word) const {
    return (1.0 - noise_mix) * class_word_dist[cls][word] +
           noise_mix / vocabulary_size;
  }
};

struct TrajectoryStep {
  int cell = 0;
  int timestep = 0;
};

/// Per-robot observation schedule. Timesteps are strictly increasing within
/// each robot and aligned across robots (robots move in lockstep).
struct TrajectoryPlan {
  int observations_per_robot = 0;
  std::vector<std::vector<TrajectoryStep>> robots;  // robot id is the index
};

/// One simulated sensor frame: a sparse word histogram taken at a cell.
struct ObservationFrame {
  int robot_id = 0;
  int timestep = 0;
  int cell = 0;
  std::map<int, int> word_counts;  // word id -> count

  int total_words() const {
    int n = 0;
    for (const auto& [w, c] : word_counts) n += c;
    return n;
  }
};

/// Generates a ground-truth map whose classes form contiguous patches.
/// Patches are grown from seeded points; their mean diameter scales with
/// `patchiness` (in cells). Every class id appears at least once.
/// Deterministic for a fixed (seed, grid, num_classes, patchiness).
GroundTruthMap generate_environment(std::uint64_t seed, const GridSpec& grid,
                                    int num_classes, double patchiness);

/// Builds per-class word distributions: each class gets `words_per_class`
/// support words with Dirichlet(1) weights. Rows are guaranteed pairwise
/// distinct.
LabelEmissionModel make_emission_model(std::uint64_t seed, int num_classes,
                                       int vocabulary_size, double noise_mix,
                                       int words_per_class);

/// Region id per cell for a split of the grid into `num_robots` contiguous
/// regions of near-equal area (cell counts differ by at most one).
std::vector<int> partition_regions(const GridSpec& grid, int num_robots,
                                   std::uint64_t seed);

/// Splits the environment among robots and plans a lawnmower sweep of each
/// region, subsampled or extended to exactly `observations_per_robot` frames.
TrajectoryPlan plan_coverage_trajectories(const GroundTruthMap& map,
                                          int num_robots,
                                          int observations_per_robot,
                                          std::uint64_t seed);

/// Draws `words_per_obs` words from the emission mixture of the cell's
/// ground-truth class. Deterministic per (seed, robot_id, timestep, cell).
ObservationFrame observe(const GroundTruthMap& map,
                         const LabelEmissionModel& emission, int cell,
                         int words_per_obs, std::uint64_t seed,
                         int robot_id = 0, int timestep = 0);

/// Named, fully reproducible environment recipe.
struct EnvironmentConfig {
  std::string name = "custom";
  std::uint64_t seed = 0;
  GridSpec grid{64, 64, 1.0};
  int num_classes = 8;
  double patchiness = 4.0;
  int vocabulary_size = 1000;
  double noise_mix = 0.1;
  int words_per_class = 20;
};

struct Environment {
  EnvironmentConfig config;
  GroundTruthMap map;
  LabelEmissionModel emission;
};

Environment make_environment(const EnvironmentConfig& config);

/// env1: many small patches per class, so every robot region contains most
/// classes. env2: about one large patch per class, so robot regions share
/// few classes.
EnvironmentConfig env1_config();
EnvironmentConfig env2_config();

/// Returns the preset for "env1"/"env2", or throws std::invalid_argument.
EnvironmentConfig preset_config(const std::string& name);

}  // namespace semfuse
