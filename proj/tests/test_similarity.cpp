// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/similarity.hpp"

using namespace semfuse;
using semfuse::testing::random_simplex_point;

namespace {

TopicDescriptor desc(std::vector<double> w) { return TopicDescriptor{std::move(w)}; }

}  // namespace

TEST_CASE("topic overlap hand values") {
  const TopicDescriptor a = desc({0.5, 0.5, 0.0});
  const TopicDescriptor b = desc({0.5, 0.0, 0.5});
  CHECK(topic_overlap(a, a) == doctest::Approx(1.0));
  CHECK(topic_overlap(a, b) == doctest::Approx(0.5));
  CHECK(topic_overlap(desc({1, 0, 0}), desc({0, 1, 0})) == doctest::Approx(0.0));
}

TEST_CASE("cosine similarity hand values") {
  CHECK(cosine_similarity(desc({0.2, 0.8}), desc({0.2, 0.8})) == doctest::Approx(1.0));
  CHECK(cosine_similarity(desc({1, 0}), desc({0, 1})) == doctest::Approx(0.0));
  CHECK(cosine_similarity(desc({1, 0}), desc({0.5, 0.5})) ==
        doctest::Approx(std::sqrt(2.0) / 2.0));
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(topic_overlap(desc({0.7, 0.7}), desc({0.5, 0.5})), std::invalid_argument);
  CHECK_THROWS_AS(topic_overlap(desc({-0.1, 1.1}), desc({0.5, 0.5})), std::invalid_argument);
  CHECK_THROWS_AS(topic_overlap(desc({0.5, 0.5}), desc({0.5})), std::invalid_argument);
  CHECK_THROWS_AS(cosine_similarity(desc({0, 0}), desc({1, 0})), std::invalid_argument);
}

TEST_CASE("metric properties on random simplex points") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 2 + rng.uniform_int(16);
    const TopicDescriptor a = random_simplex_point(rng, dim);
    const TopicDescriptor b = random_simplex_point(rng, dim);
    const double to_ab = topic_overlap(a, b);
    const double cs_ab = cosine_similarity(a, b);
    CHECK(to_ab >= 0.0);
    CHECK(to_ab <= 1.0);
    CHECK(cs_ab >= 0.0);
    CHECK(cs_ab <= 1.0);
    CHECK(to_ab == doctest::Approx(topic_overlap(b, a)));
    CHECK(cs_ab == doctest::Approx(cosine_similarity(b, a)));
    CHECK(topic_overlap(a, a) == doctest::Approx(1.0));
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    // Distinct points never reach 1 (score 1 iff equal / parallel).
    CHECK(to_ab < 1.0);
    CHECK(cs_ab < 1.0);
  }
}

TEST_CASE("total variation satisfies the triangle inequality") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 2 + rng.uniform_int(12);
    const TopicDescriptor a = random_simplex_point(rng, dim);
    const TopicDescriptor b = random_simplex_point(rng, dim);
    const TopicDescriptor c = random_simplex_point(rng, dim);
    const double ab = 1.0 - topic_overlap(a, b);
    const double bc = 1.0 - topic_overlap(b, c);
    const double ac = 1.0 - topic_overlap(a, c);
    CHECK(ac <= ab + bc + 1e-12);
  }
}

TEST_CASE("similarity matrix layout and values") {
  SUBCASE("one robot, one topic") {
    const SimilarityMatrix sim =
        pairwise_similarity_matrix({{0, {desc({1.0, 0.0})}}}, SimilarityMetric::Cosine);
    REQUIRE(sim.registry.size() == 1);
    CHECK(sim.scores(0, 0) == 1.0);
  }

  SUBCASE("identical descriptor sets produce a permutation block of ones") {
    const TopicDescriptor x = desc({0.7, 0.3, 0.0});
    const TopicDescriptor y = desc({0.0, 0.2, 0.8});
    const SimilarityMatrix sim = pairwise_similarity_matrix(
        {{0, {x, y}}, {1, {y, x}}}, SimilarityMetric::TopicOverlap);
    REQUIRE(sim.registry.size() == 4);
    CHECK(sim.registry[2].robot_id == 1);
    CHECK(sim.scores(0, 3) == doctest::Approx(1.0));
    CHECK(sim.scores(1, 2) == doctest::Approx(1.0));
    for (int i = 0; i < 4; ++i) {
      CHECK(sim.scores(i, i) == 1.0);
      for (int j = 0; j < 4; ++j) CHECK(sim.scores(i, j) == sim.scores(j, i));
    }
  }

  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(pairwise_similarity_matrix({}, SimilarityMetric::Cosine),
                    std::invalid_argument);
  }
}

TEST_CASE("a 96-topic team matrix builds quickly") {
  Rng rng(5);
  std::vector<RobotDescriptors> team;
  for (int r = 0; r < 12; ++r) {
    RobotDescriptors rd{r, {}};
    for (int t = 0; t < 8; ++t) rd.descriptors.push_back(random_simplex_point(rng, 1000));
    team.push_back(std::move(rd));
  }
  const auto start = std::chrono::steady_clock::now();
  const SimilarityMatrix sim = pairwise_similarity_matrix(team, SimilarityMetric::TopicOverlap);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(sim.registry.size() == 96);
  const double ms = std::chrono::duration<double, std::milli>(elapsed).count();
  MESSAGE("96x96 topic-overlap matrix built in ", ms, " ms");
  CHECK(ms < 100.0);  // target envelope is 10 ms; generous bound for CI noise
}

TEST_CASE("similarity CSV has a registry header") {
  const SimilarityMatrix sim = pairwise_similarity_matrix(
      {{2, {desc({1.0, 0.0})}}, {5, {desc({0.0, 1.0})}}}, SimilarityMetric::Cosine);
  std::ostringstream os;
  write_similarity_csv(os, sim);
  const std::string text = os.str();
  CHECK(text.substr(0, text.find('\n')) == "2:0,5:0");
  CHECK(text.find("1,0") != std::string::npos);
}
