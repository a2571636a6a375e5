// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "semfuse/topic_model.hpp"

namespace semfuse {

/// Decode failure. `kind` distinguishes a version mismatch from everything
/// else (truncation, corruption, implausible sizes).
class WireError : public std::runtime_error {
 public:
  enum class Kind { Version, Truncated, Corrupt };
  WireError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Decoded form of the payload a robot shares with the team.
struct MapPayload {
  int robot_id = 0;
  int timestep = 0;
  GridSpec grid;
  LocalSemanticMap map;
  std::vector<TopicDescriptor> descriptors;  // renormalized after dequantization
};

/// Serializes a local map plus its descriptor set.
///
/// Layout (all integers little-endian):
///   u8   format version (currently 1)
///   u8   flags (0)
///   u32  robot_id
///   u32  timestep
///   u32  vocabulary size V
///   u16  descriptor count K
///   u32  uncompressed body size
///   u32  compressed body size
///   byte[] DEFLATE-compressed body:
///     u32 grid width, u32 grid height
///     label run-length stream over row-major cells: varint pairs
///       (run length, label + 1), 0 encoding "unobserved"
///     timestep stream for observed cells in cell order: zigzag varint deltas
///     descriptors: K x V u16 fixed-point weights (w * 65535, rounded)
///
/// Labels and timestamps round-trip exactly; descriptor entries round-trip
/// within 1e-3 (quantization step is 1/65535).
std::vector<std::uint8_t> encode_map_payload(const LocalSemanticMap& map,
                                             const std::vector<TopicDescriptor>& descriptors,
                                             const GridSpec& grid, int timestep);

/// Parses a payload. Throws WireError on any malformed input; never crashes
/// on arbitrary bytes.
MapPayload decode_map_payload(const std::vector<std::uint8_t>& bytes);

}  // namespace semfuse
