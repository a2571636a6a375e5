// SPDX-License-Identifier: Apache-2.0
#include "semfuse/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "semfuse/rng.hpp"

namespace semfuse {

namespace {

const int kNeighborDx[4] = {1, -1, 0, 0};
const int kNeighborDy[4] = {0, 0, 1, -1};

void check_grid(const GridSpec& grid) {
  if (grid.width < 1 || grid.height < 1) {
    throw std::invalid_argument("grid dimensions must be >= 1");
  }
}

// Boustrophedon visit order: row 0 left to right, row 1 right to left, ...
// Consecutive cells are always grid neighbors, so any contiguous slice of
// this order is a contiguous region.
std::vector<int> serpentine_order(const GridSpec& grid, bool column_major) {
  std::vector<int> order;
  order.reserve(grid.cell_count());
  if (!column_major) {
    for (int y = 0; y < grid.height; ++y) {
      if (y % 2 == 0) {
        for (int x = 0; x < grid.width; ++x) order.push_back(grid.cell_at(x, y));
      } else {
        for (int x = grid.width - 1; x >= 0; --x) order.push_back(grid.cell_at(x, y));
      }
    }
  } else {
    for (int x = 0; x < grid.width; ++x) {
      if (x % 2 == 0) {
        for (int y = 0; y < grid.height; ++y) order.push_back(grid.cell_at(x, y));
      } else {
        for (int y = grid.height - 1; y >= 0; --y) order.push_back(grid.cell_at(x, y));
      }
    }
  }
  return order;
}

}  // namespace

GroundTruthMap generate_environment(std::uint64_t seed, const GridSpec& grid,
                                    int num_classes, double patchiness) {
  check_grid(grid);
  const int cells = grid.cell_count();
  if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
  if (num_classes > cells) {
    throw std::invalid_argument("num_classes exceeds cell count");
  }

  Rng rng(derive_seed(seed, 0xE11));

  // Target patch area is patchiness^2 cells.
  const double area = std::max(1.0, patchiness * patchiness);
  int num_patches = static_cast<int>(std::llround(cells / area));
  num_patches = std::clamp(num_patches, num_classes, cells);

  // Seed cells, one per patch. The first num_classes patches take distinct
  // classes so every class is guaranteed to appear.
  std::vector<int> seeds = rng.sample_without_replacement(cells, num_patches);
  std::vector<int> patch_class(num_patches);
  for (int p = 0; p < num_patches; ++p) {
    patch_class[p] = p < num_classes ? p : rng.uniform_int(num_classes);
  }

  // Eden growth: repeatedly pick a random claimed frontier cell and claim a
  // random unclaimed neighbor. Produces irregular contiguous blobs.
  std::vector<int> owner(cells, -1);
  std::vector<int> frontier;
  frontier.reserve(cells);
  for (int p = 0; p < num_patches; ++p) {
    owner[seeds[p]] = p;
    frontier.push_back(seeds[p]);
  }
  int claimed = num_patches;
  while (claimed < cells) {
    const int fi = rng.uniform_int(static_cast<int>(frontier.size()));
    const int cell = frontier[fi];
    const int cx = grid.x_of(cell);
    const int cy = grid.y_of(cell);
    int candidates[4];
    int num_candidates = 0;
    for (int d = 0; d < 4; ++d) {
      const int nx = cx + kNeighborDx[d];
      const int ny = cy + kNeighborDy[d];
      if (nx < 0 || nx >= grid.width || ny < 0 || ny >= grid.height) continue;
      const int n = grid.cell_at(nx, ny);
      if (owner[n] < 0) candidates[num_candidates++] = n;
    }
    if (num_candidates == 0) {
      frontier[fi] = frontier.back();
      frontier.pop_back();
      continue;
    }
    const int n = candidates[rng.uniform_int(num_candidates)];
    owner[n] = owner[cell];
    frontier.push_back(n);
    ++claimed;
  }

  GroundTruthMap map;
  map.grid = grid;
  map.num_classes = num_classes;
  map.labels.resize(cells);
  for (int c = 0; c < cells; ++c) map.labels[c] = patch_class[owner[c]];
  return map;
}

LabelEmissionModel make_emission_model(std::uint64_t seed, int num_classes,
                                       int vocabulary_size, double noise_mix,
                                       int words_per_class) {
  if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
  if (vocabulary_size < 1) throw std::invalid_argument("vocabulary_size must be >= 1");
  if (words_per_class < 1 || words_per_class > vocabulary_size) {
    throw std::invalid_argument("words_per_class must be in [1, vocabulary_size]");
  }
  if (noise_mix < 0.0 || noise_mix >= 1.0) {
    throw std::invalid_argument("noise_mix must be in [0, 1)");
  }

  Rng rng(derive_seed(seed, 0x3A11));
  LabelEmissionModel model;
  model.vocabulary_size = vocabulary_size;
  model.noise_mix = noise_mix;
  model.class_word_dist.assign(num_classes, std::vector<double>(vocabulary_size, 0.0));

  for (int c = 0; c < num_classes; ++c) {
    for (int attempt = 0;; ++attempt) {
      std::vector<int> support = rng.sample_without_replacement(vocabulary_size, words_per_class);
      std::vector<double>& row = model.class_word_dist[c];
      std::fill(row.begin(), row.end(), 0.0);
      double total = 0.0;
      for (int w : support) {
        // Exponential draws normalize to a Dirichlet(1) sample on the support.
        const double e = -std::log(1.0 - rng.uniform());
        row[w] = e;
        total += e;
      }
      for (int w : support) row[w] /= total;

      bool distinct = true;
      for (int prev = 0; prev < c && distinct; ++prev) {
        double l1 = 0.0;
        for (int w = 0; w < vocabulary_size; ++w) {
          l1 += std::abs(row[w] - model.class_word_dist[prev][w]);
        }
        distinct = l1 > 0.0;
      }
      if (distinct) break;
      if (attempt > 64) throw std::runtime_error("could not draw distinct class rows");
    }
  }
  return model;
}

std::vector<int> partition_regions(const GridSpec& grid, int num_robots,
                                   std::uint64_t seed) {
  check_grid(grid);
  if (num_robots < 1) throw std::invalid_argument("num_robots must be >= 1");
  const int cells = grid.cell_count();
  if (num_robots > cells) throw std::invalid_argument("more robots than cells");

  const bool column_major = (derive_seed(seed, 0xD12) & 1) != 0;
  const std::vector<int> order = serpentine_order(grid, column_major);

  std::vector<int> region(cells, 0);
  const int base = cells / num_robots;
  const int extra = cells % num_robots;
  int pos = 0;
  for (int r = 0; r < num_robots; ++r) {
    const int size = base + (r < extra ? 1 : 0);
    for (int i = 0; i < size; ++i) region[order[pos++]] = r;
  }
  return region;
}

TrajectoryPlan plan_coverage_trajectories(const GroundTruthMap& map,
                                          int num_robots,
                                          int observations_per_robot,
                                          std::uint64_t seed) {
  if (num_robots < 1) throw std::invalid_argument("num_robots must be >= 1");
  if (observations_per_robot < 1) {
    throw std::invalid_argument("observations_per_robot must be >= 1");
  }
  const GridSpec& grid = map.grid;
  const int cells = grid.cell_count();
  if (num_robots > cells) throw std::invalid_argument("more robots than cells");

  const bool column_major = (derive_seed(seed, 0xD12) & 1) != 0;
  const std::vector<int> order = serpentine_order(grid, column_major);

  TrajectoryPlan plan;
  plan.observations_per_robot = observations_per_robot;
  plan.robots.resize(num_robots);

  const int base = cells / num_robots;
  const int extra = cells % num_robots;
  int pos = 0;
  for (int r = 0; r < num_robots; ++r) {
    const int size = base + (r < extra ? 1 : 0);
    const int begin = pos;
    pos += size;

    std::vector<TrajectoryStep>& traj = plan.robots[r];
    traj.reserve(observations_per_robot);
    if (size >= observations_per_robot) {
      // Even subsample of the sweep.
      for (int i = 0; i < observations_per_robot; ++i) {
        const long long idx = static_cast<long long>(i) * size / observations_per_robot;
        traj.push_back({order[begin + static_cast<int>(idx)], i});
      }
    } else {
      // Re-sweep the region until the budget is used up.
      for (int i = 0; i < observations_per_robot; ++i) {
        traj.push_back({order[begin + (i % size)], i});
      }
    }
  }
  return plan;
}

ObservationFrame observe(const GroundTruthMap& map,
                         const LabelEmissionModel& emission, int cell,
                         int words_per_obs, std::uint64_t seed, int robot_id,
                         int timestep) {
  if (!map.grid.contains(cell)) throw std::invalid_argument("cell outside grid");
  if (words_per_obs < 0) throw std::invalid_argument("words_per_obs must be >= 0");
  const int cls = map.labels[cell];
  const int vocab = emission.vocabulary_size;

  std::vector<double> cdf(vocab);
  double acc = 0.0;
  for (int w = 0; w < vocab; ++w) {
    acc += emission.mixture(cls, w);
    cdf[w] = acc;
  }

  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(robot_id),
                      static_cast<std::uint64_t>(timestep),
                      static_cast<std::uint64_t>(cell)));
  ObservationFrame frame;
  frame.robot_id = robot_id;
  frame.timestep = timestep;
  frame.cell = cell;
  for (int i = 0; i < words_per_obs; ++i) {
    const double u = rng.uniform() * acc;
    const int w = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    frame.word_counts[std::min(w, vocab - 1)] += 1;
  }
  return frame;
}

Environment make_environment(const EnvironmentConfig& config) {
  Environment env;
  env.config = config;
  env.map = generate_environment(config.seed, config.grid, config.num_classes,
                                 config.patchiness);
  env.emission = make_emission_model(derive_seed(config.seed, 0xE3), config.num_classes,
                                     config.vocabulary_size, config.noise_mix,
                                     config.words_per_class);
  return env;
}

EnvironmentConfig env1_config() {
  EnvironmentConfig cfg;
  cfg.name = "env1";
  cfg.seed = 101;
  cfg.grid = GridSpec{64, 64, 1.0};
  cfg.num_classes = 8;
  cfg.patchiness = 4.0;
  return cfg;
}

EnvironmentConfig env2_config() {
  EnvironmentConfig cfg;
  cfg.name = "env2";
  cfg.seed = 202;
  cfg.grid = GridSpec{64, 64, 1.0};
  cfg.num_classes = 12;
  cfg.patchiness = 18.0;
  return cfg;
}

EnvironmentConfig preset_config(const std::string& name) {
  if (name == "env1") return env1_config();
  if (name == "env2") return env2_config();
  throw std::invalid_argument("unknown environment preset: " + name);
}

}  // namespace semfuse
