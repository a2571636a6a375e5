// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "semfuse/fusion.hpp"
#include "semfuse/metrics.hpp"
#include "semfuse/rng.hpp"

using namespace semfuse;

namespace {

LocalSemanticMap local_map(int robot, int num_topics,
                           std::vector<LocalSemanticMap::Entry> cells) {
  LocalSemanticMap m;
  m.robot_id = robot;
  m.num_topics = num_topics;
  m.cells = std::move(cells);
  return m;
}

ClusterAssignment identity_assignment(const std::vector<std::pair<int, int>>& counts) {
  return id_based_match(counts);
}

}  // namespace

TEST_CASE("fusing one map through the identity is the identity") {
  const GridSpec grid{3, 1};
  const LocalSemanticMap m = local_map(0, 2, {{0, 0, 1}, {2, 1, 4}});
  const GlobalSemanticMap fused = fuse_maps({m}, identity_assignment({{0, 2}}), grid);
  CHECK(fused.labels == std::vector<int>{0, -1, 1});
  CHECK(fused.source_robot == std::vector<int>{0, -1, 0});
  CHECK(fused.source_timestep == std::vector<int>{1, -1, 4});
  CHECK(fused.coverage_fraction() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("disjoint regions fuse to the union with translated labels") {
  const GridSpec grid{4, 1};
  const LocalSemanticMap a = local_map(0, 1, {{0, 0, 1}, {1, 0, 2}});
  const LocalSemanticMap b = local_map(1, 2, {{2, 1, 1}, {3, 0, 2}});
  // Hand-built correspondence: robot0 topic0 -> g0, robot1 topics -> g1, g0.
  ClusterAssignment assignment;
  assignment.num_global_labels = 2;
  assignment.registry = {{0, 0}, {1, 0}, {1, 1}};
  assignment.labels = {0, 1, 0};
  const GlobalSemanticMap fused = fuse_maps({a, b}, assignment, grid);
  CHECK(fused.labels == std::vector<int>{0, 0, 0, 1});
}

TEST_CASE("the most recent visitor wins a shared cell") {
  const GridSpec grid{1, 1};
  const LocalSemanticMap early = local_map(0, 1, {{0, 0, 5}});
  const LocalSemanticMap late = local_map(1, 1, {{0, 0, 9}});
  ClusterAssignment assignment;
  assignment.num_global_labels = 2;
  assignment.registry = {{0, 0}, {1, 0}};
  assignment.labels = {0, 1};

  SUBCASE("later timestep wins regardless of order") {
    CHECK(fuse_maps({early, late}, assignment, grid).labels[0] == 1);
    CHECK(fuse_maps({late, early}, assignment, grid).labels[0] == 1);
  }
  SUBCASE("timestamp ties break toward the lower robot id") {
    const LocalSemanticMap tie = local_map(1, 1, {{0, 0, 5}});
    CHECK(fuse_maps({early, tie}, assignment, grid).labels[0] == 0);
    CHECK(fuse_maps({tie, early}, assignment, grid).labels[0] == 0);
  }
}

TEST_CASE("unmapped local labels are a hard error") {
  const GridSpec grid{2, 1};
  const LocalSemanticMap m = local_map(0, 2, {{0, 1, 3}});
  CHECK_THROWS_AS(fuse_maps({m}, identity_assignment({{0, 1}}), grid),
                  std::invalid_argument);
}

TEST_CASE("fusion covers exactly the union of labeled cells") {
  Rng rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const GridSpec grid{6, 6};
    const int robots = 1 + rng.uniform_int(4);
    std::vector<LocalSemanticMap> maps;
    std::vector<std::pair<int, int>> counts;
    std::set<int> expected;
    for (int r = 0; r < robots; ++r) {
      const int topics = 1 + rng.uniform_int(3);
      counts.push_back({r, topics});
      std::vector<LocalSemanticMap::Entry> cells;
      const int visits = rng.uniform_int(12);
      std::set<int> used;
      for (int i = 0; i < visits; ++i) {
        const int cell = rng.uniform_int(36);
        if (!used.insert(cell).second) continue;
        cells.push_back({cell, rng.uniform_int(topics), rng.uniform_int(50)});
        expected.insert(cell);
      }
      maps.push_back(local_map(r, topics, std::move(cells)));
    }
    const GlobalSemanticMap fused = fuse_maps(maps, identity_assignment(counts), grid);
    std::set<int> got;
    for (int cell = 0; cell < 36; ++cell) {
      if (fused.labels[cell] >= 0) got.insert(cell);
    }
    CHECK(got == expected);
  }
}

TEST_CASE("relabeling global ids relabels the fused map identically") {
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const GridSpec grid{5, 5};
    const int robots = 2 + rng.uniform_int(3);
    std::vector<LocalSemanticMap> maps;
    ClusterAssignment assignment;
    assignment.num_global_labels = 4;
    for (int r = 0; r < robots; ++r) {
      const int topics = 1 + rng.uniform_int(3);
      std::vector<LocalSemanticMap::Entry> cells;
      std::set<int> used;
      for (int i = 0; i < 8; ++i) {
        const int cell = rng.uniform_int(25);
        if (!used.insert(cell).second) continue;
        cells.push_back({cell, rng.uniform_int(topics), rng.uniform_int(20)});
      }
      maps.push_back(local_map(r, topics, std::move(cells)));
      std::vector<int> perm(4);
      for (int i = 0; i < 4; ++i) perm[i] = i;
      rng.shuffle(perm);
      for (int t = 0; t < topics; ++t) {
        assignment.registry.push_back({r, t});
        assignment.labels.push_back(perm[t]);
      }
    }
    const GlobalSemanticMap base = fuse_maps(maps, assignment, grid);

    // Bijective relabel of the global ids.
    std::vector<int> bijection{2, 3, 1, 0};
    ClusterAssignment relabeled = assignment;
    for (int& l : relabeled.labels) l = bijection[l];
    const GlobalSemanticMap moved = fuse_maps(maps, relabeled, grid);

    for (int cell = 0; cell < 25; ++cell) {
      if (base.labels[cell] < 0) {
        CHECK(moved.labels[cell] == -1);
      } else {
        CHECK(moved.labels[cell] == bijection[base.labels[cell]]);
      }
      CHECK(moved.source_robot[cell] == base.source_robot[cell]);
    }

    // AMI against any ground truth is unchanged by the relabel.
    GroundTruthMap truth;
    truth.grid = grid;
    truth.num_classes = 3;
    truth.labels.resize(25);
    for (int& l : truth.labels) l = rng.uniform_int(3);
    if (base.coverage_fraction() > 0.0) {
      CHECK(ami(contingency(truth, base)) ==
            doctest::Approx(ami(contingency(truth, moved))).epsilon(1e-12));
    }
  }
}

TEST_CASE("csv and ppm exports are well formed") {
  const GridSpec grid{3, 2};
  const LocalSemanticMap m = local_map(0, 2, {{0, 0, 1}, {4, 1, 2}});
  const GlobalSemanticMap fused = fuse_maps({m}, identity_assignment({{0, 2}}), grid);

  std::ostringstream csv;
  write_global_map_csv(csv, fused);
  CHECK(csv.str() == "0,-1,-1\n-1,1,-1\n");

  std::ostringstream ppm(std::ios::binary);
  write_global_map_ppm(ppm, fused);
  const std::string bytes = ppm.str();
  CHECK(bytes.substr(0, 3) == "P6\n");
  CHECK(bytes.size() == std::string("P6\n3 2\n255\n").size() + 3 * 6);
}
