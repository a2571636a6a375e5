// SPDX-License-Identifier: Apache-2.0
#include "semfuse/wire.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace semfuse {

namespace {

constexpr std::uint8_t kFormatVersion = 1;
constexpr std::size_t kHeaderSize = 1 + 1 + 4 + 4 + 4 + 2 + 4 + 4;
constexpr std::uint32_t kMaxBodySize = 64u << 20;  // fuzz-input allocation cap
constexpr std::uint32_t kMaxCells = 16u << 20;
constexpr std::uint32_t kMaxVocabulary = 1u << 24;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v) | 0x80);
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t zigzag(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

std::int64_t unzigzag(std::uint64_t v) {
  return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = data_[pos_] | (data_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    int shift = 0;
    while (true) {
      need(1);
      const std::uint8_t byte = data_[pos_++];
      if (shift >= 64) throw WireError(WireError::Kind::Corrupt, "varint overflow");
      v |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
      if (!(byte & 0x80)) return v;
      shift += 7;
    }
  }
  std::size_t remaining() const { return size_ - pos_; }
  const std::uint8_t* cursor() const { return data_ + pos_; }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(std::size_t n) const {
    if (size_ - pos_ < n) {
      throw WireError(WireError::Kind::Truncated, "payload truncated");
    }
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> deflate_bytes(const std::vector<std::uint8_t>& raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> out(bound);
  if (compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw std::runtime_error("deflate failed");
  }
  out.resize(bound);
  return out;
}

std::vector<std::uint8_t> inflate_bytes(const std::uint8_t* data, std::size_t size,
                                        std::uint32_t expected) {
  std::vector<std::uint8_t> out(expected);
  uLongf out_size = expected;
  const int rc = uncompress(out.data(), &out_size, data, static_cast<uLong>(size));
  if (rc != Z_OK || out_size != expected) {
    throw WireError(WireError::Kind::Corrupt, "body does not inflate");
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_map_payload(const LocalSemanticMap& map,
                                             const std::vector<TopicDescriptor>& descriptors,
                                             const GridSpec& grid, int timestep) {
  for (const LocalSemanticMap::Entry& e : map.cells) {
    if (!grid.contains(e.cell)) throw std::invalid_argument("map cell outside grid");
    if (e.label < 0 || e.label >= static_cast<int>(descriptors.size())) {
      throw std::invalid_argument("map label without a descriptor");
    }
  }
  if (descriptors.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument("too many descriptors");
  }
  const std::uint32_t vocab =
      descriptors.empty() ? 0 : static_cast<std::uint32_t>(descriptors[0].weights.size());
  for (const TopicDescriptor& d : descriptors) {
    if (d.weights.size() != vocab) throw std::invalid_argument("descriptor sizes differ");
  }

  // Dense label image, -1 for unobserved.
  std::vector<int> dense(grid.cell_count(), -1);
  for (const LocalSemanticMap::Entry& e : map.cells) dense[e.cell] = e.label;

  std::vector<std::uint8_t> body;
  put_u32(body, static_cast<std::uint32_t>(grid.width));
  put_u32(body, static_cast<std::uint32_t>(grid.height));

  for (int cell = 0; cell < grid.cell_count();) {
    const int value = dense[cell];
    int run = 1;
    while (cell + run < grid.cell_count() && dense[cell + run] == value) ++run;
    put_varint(body, static_cast<std::uint64_t>(run));
    put_varint(body, static_cast<std::uint64_t>(value + 1));
    cell += run;
  }

  std::int64_t prev = 0;
  for (const LocalSemanticMap::Entry& e : map.cells) {
    put_varint(body, zigzag(e.timestep - prev));
    prev = e.timestep;
  }

  for (const TopicDescriptor& d : descriptors) {
    for (double w : d.weights) {
      const double clamped = std::clamp(w, 0.0, 1.0);
      put_u16(body, static_cast<std::uint16_t>(std::lround(clamped * 65535.0)));
    }
  }

  const std::vector<std::uint8_t> packed = deflate_bytes(body);

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + packed.size());
  out.push_back(kFormatVersion);
  out.push_back(0);  // flags
  put_u32(out, static_cast<std::uint32_t>(map.robot_id));
  put_u32(out, static_cast<std::uint32_t>(timestep));
  put_u32(out, vocab);
  put_u16(out, static_cast<std::uint16_t>(descriptors.size()));
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  put_u32(out, static_cast<std::uint32_t>(packed.size()));
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

MapPayload decode_map_payload(const std::vector<std::uint8_t>& bytes) {
  Reader header(bytes.data(), bytes.size());
  const std::uint8_t version = header.u8();
  if (version != kFormatVersion) {
    throw WireError(WireError::Kind::Version, "unsupported payload version");
  }
  header.u8();  // flags, reserved
  MapPayload payload;
  payload.robot_id = static_cast<int>(header.u32());
  payload.timestep = static_cast<int>(header.u32());
  const std::uint32_t vocab = header.u32();
  const std::uint16_t num_descriptors = header.u16();
  const std::uint32_t body_size = header.u32();
  const std::uint32_t packed_size = header.u32();
  if (vocab > kMaxVocabulary || body_size > kMaxBodySize) {
    throw WireError(WireError::Kind::Corrupt, "implausible payload sizes");
  }
  if (header.remaining() != packed_size) {
    throw WireError(WireError::Kind::Truncated, "compressed body size mismatch");
  }

  const std::vector<std::uint8_t> body =
      inflate_bytes(header.cursor(), packed_size, body_size);
  Reader r(body.data(), body.size());

  const std::uint32_t width = r.u32();
  const std::uint32_t height = r.u32();
  if (width == 0 || height == 0 ||
      static_cast<std::uint64_t>(width) * height > kMaxCells) {
    throw WireError(WireError::Kind::Corrupt, "implausible grid size");
  }
  payload.grid = GridSpec{static_cast<int>(width), static_cast<int>(height), 1.0};
  payload.map.robot_id = payload.robot_id;
  payload.map.num_topics = num_descriptors;

  const std::uint64_t cells = static_cast<std::uint64_t>(width) * height;
  std::uint64_t cell = 0;
  while (cell < cells) {
    const std::uint64_t run = r.varint();
    const std::uint64_t encoded = r.varint();
    if (run == 0 || run > cells - cell) {
      throw WireError(WireError::Kind::Corrupt, "bad label run");
    }
    if (encoded > static_cast<std::uint64_t>(num_descriptors)) {
      throw WireError(WireError::Kind::Corrupt, "label outside descriptor set");
    }
    if (encoded != 0) {
      const int label = static_cast<int>(encoded) - 1;
      for (std::uint64_t i = 0; i < run; ++i) {
        payload.map.cells.push_back({static_cast<int>(cell + i), label, 0});
      }
    }
    cell += run;
  }

  std::int64_t prev = 0;
  for (LocalSemanticMap::Entry& e : payload.map.cells) {
    prev += unzigzag(r.varint());
    if (prev < std::numeric_limits<int>::min() || prev > std::numeric_limits<int>::max()) {
      throw WireError(WireError::Kind::Corrupt, "timestep out of range");
    }
    e.timestep = static_cast<int>(prev);
  }

  for (int k = 0; k < num_descriptors; ++k) {
    TopicDescriptor d;
    d.weights.resize(vocab);
    double sum = 0.0;
    for (std::uint32_t w = 0; w < vocab; ++w) {
      d.weights[w] = r.u16() / 65535.0;
      sum += d.weights[w];
    }
    // Renormalize so decoded descriptors are valid simplex points again.
    if (sum > 0.0) {
      for (double& w : d.weights) w /= sum;
    } else if (vocab > 0) {
      for (double& w : d.weights) w = 1.0 / vocab;
    }
    payload.descriptors.push_back(std::move(d));
  }

  if (r.remaining() != 0) {
    throw WireError(WireError::Kind::Corrupt, "trailing bytes in body");
  }
  return payload;
}

}  // namespace semfuse
