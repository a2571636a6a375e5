// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/wire.hpp"
#include "semfuse/world.hpp"

using namespace semfuse;
using semfuse::testing::random_simplex_point;

namespace {

LocalSemanticMap random_map(Rng& rng, const GridSpec& grid, int num_topics,
                            int robot_id) {
  LocalSemanticMap m;
  m.robot_id = robot_id;
  m.num_topics = num_topics;
  int timestep = 0;
  for (int cell = 0; cell < grid.cell_count(); ++cell) {
    if (rng.uniform() < 0.4) {
      timestep += 1 + rng.uniform_int(5);
      m.cells.push_back({cell, rng.uniform_int(num_topics), timestep});
    }
  }
  return m;
}

std::vector<TopicDescriptor> random_descriptors(Rng& rng, int k, int vocab) {
  std::vector<TopicDescriptor> out;
  for (int i = 0; i < k; ++i) out.push_back(random_simplex_point(rng, vocab));
  return out;
}

}  // namespace

TEST_CASE("an empty map encodes into a tiny payload") {
  LocalSemanticMap empty;
  empty.robot_id = 3;
  const std::vector<std::uint8_t> bytes =
      encode_map_payload(empty, {}, GridSpec{8, 8}, 0);
  CHECK(bytes.size() < 64);
  const MapPayload back = decode_map_payload(bytes);
  CHECK(back.robot_id == 3);
  CHECK(back.map.cells.empty());
  CHECK(back.descriptors.empty());
}

TEST_CASE("payloads round-trip labels, timestamps and robot identity") {
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const GridSpec grid{1 + rng.uniform_int(40), 1 + rng.uniform_int(40)};
    const int topics = 1 + rng.uniform_int(12);
    const LocalSemanticMap m = random_map(rng, grid, topics, trial);
    const auto descs = random_descriptors(rng, topics, 1 + rng.uniform_int(64));
    const std::vector<std::uint8_t> bytes = encode_map_payload(m, descs, grid, 17);
    const MapPayload back = decode_map_payload(bytes);

    CHECK(back.robot_id == trial);
    CHECK(back.timestep == 17);
    CHECK(back.grid == grid);
    REQUIRE(back.map.cells.size() == m.cells.size());
    for (std::size_t i = 0; i < m.cells.size(); ++i) {
      CHECK(back.map.cells[i].cell == m.cells[i].cell);
      CHECK(back.map.cells[i].label == m.cells[i].label);
      CHECK(back.map.cells[i].timestep == m.cells[i].timestep);
    }
  }
}

TEST_CASE("descriptors round-trip within quantization tolerance onto the simplex") {
  Rng rng(73);
  const GridSpec grid{10, 10};
  const auto descs = random_descriptors(rng, 8, 500);
  LocalSemanticMap m = random_map(rng, grid, 8, 0);
  const MapPayload back = decode_map_payload(encode_map_payload(m, descs, grid, 1));
  REQUIRE(back.descriptors.size() == descs.size());
  for (std::size_t k = 0; k < descs.size(); ++k) {
    double sum = 0.0;
    for (std::size_t w = 0; w < descs[k].weights.size(); ++w) {
      CHECK(std::abs(back.descriptors[k].weights[w] - descs[k].weights[w]) < 1e-3);
      CHECK(back.descriptors[k].weights[w] >= 0.0);
      sum += back.descriptors[k].weights[w];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("encode is deterministic") {
  Rng rng(79);
  const GridSpec grid{12, 12};
  const LocalSemanticMap m = random_map(rng, grid, 4, 2);
  const auto descs = random_descriptors(rng, 4, 100);
  CHECK(encode_map_payload(m, descs, grid, 5) == encode_map_payload(m, descs, grid, 5));
}

TEST_CASE("malformed payloads raise explicit decode errors") {
  Rng rng(83);
  const GridSpec grid{6, 6};
  const LocalSemanticMap m = random_map(rng, grid, 3, 1);
  const auto descs = random_descriptors(rng, 3, 50);
  std::vector<std::uint8_t> bytes = encode_map_payload(m, descs, grid, 9);

  SUBCASE("wrong version byte") {
    bytes[0] = 99;
    try {
      decode_map_payload(bytes);
      FAIL("expected WireError");
    } catch (const WireError& e) {
      CHECK(e.kind() == WireError::Kind::Version);
    }
  }

  SUBCASE("truncation at every prefix is an error, never a crash") {
    for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
      const std::vector<std::uint8_t> prefix(bytes.begin(), bytes.begin() + cut);
      CHECK_THROWS_AS(decode_map_payload(prefix), WireError);
    }
  }

  SUBCASE("corrupted compressed body") {
    bytes[bytes.size() - 3] ^= 0xff;
    CHECK_THROWS_AS(decode_map_payload(bytes), WireError);
  }
}

TEST_CASE("random bytes never crash the decoder") {
  Rng rng(89);
  int decoded = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::uint8_t> junk(rng.uniform_int(200));
    for (auto& b : junk) b = static_cast<std::uint8_t>(rng.uniform_int(256));
    if (!junk.empty() && rng.uniform() < 0.5) junk[0] = 1;  // plausible version
    try {
      decode_map_payload(junk);
      ++decoded;  // vanishingly unlikely, but not an error by itself
    } catch (const WireError&) {
    }
  }
  CHECK(decoded == 0);
}

TEST_CASE("encode rejects inconsistent inputs") {
  LocalSemanticMap m;
  m.robot_id = 0;
  m.cells.push_back({0, 2, 1});  // label 2 but only 1 descriptor
  Rng rng(97);
  CHECK_THROWS_AS(encode_map_payload(m, random_descriptors(rng, 1, 10), GridSpec{2, 2}, 0),
                  std::invalid_argument);
  m.cells[0] = {99, 0, 1};  // outside grid
  CHECK_THROWS_AS(encode_map_payload(m, random_descriptors(rng, 1, 10), GridSpec{2, 2}, 0),
                  std::invalid_argument);
}
