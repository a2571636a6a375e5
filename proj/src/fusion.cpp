// SPDX-License-Identifier: Apache-2.0
#include "semfuse/fusion.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace semfuse {

namespace {

std::uint64_t ref_key(int robot_id, int topic_id) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(robot_id)) << 32) |
         static_cast<std::uint32_t>(topic_id);
}

void write_palette_pixel(std::ostream& os, int label) {
  // Golden-angle hue walk keeps adjacent label ids visually distinct.
  unsigned char rgb[3] = {0, 0, 0};
  if (label >= 0) {
    const double hue = std::fmod(label * 137.507764, 360.0) / 60.0;
    const int i = static_cast<int>(hue);
    const double f = hue - i;
    const double v = 0.95, s = 0.8;
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r = 0, g = 0, b = 0;
    switch (i % 6) {
      case 0: r = v; g = t; b = p; break;
      case 1: r = q; g = v; b = p; break;
      case 2: r = p; g = v; b = t; break;
      case 3: r = p; g = q; b = v; break;
      case 4: r = t; g = p; b = v; break;
      case 5: r = v; g = p; b = q; break;
    }
    rgb[0] = static_cast<unsigned char>(r * 255);
    rgb[1] = static_cast<unsigned char>(g * 255);
    rgb[2] = static_cast<unsigned char>(b * 255);
  }
  os.write(reinterpret_cast<const char*>(rgb), 3);
}

void write_ppm(std::ostream& os, const GridSpec& grid, const std::vector<int>& labels) {
  os << "P6\n" << grid.width << ' ' << grid.height << "\n255\n";
  for (int cell = 0; cell < grid.cell_count(); ++cell) {
    write_palette_pixel(os, labels[cell]);
  }
}

}  // namespace

double GlobalSemanticMap::coverage_fraction() const {
  if (labels.empty()) return 0.0;
  long long observed = 0;
  for (int l : labels) observed += (l >= 0);
  return static_cast<double>(observed) / labels.size();
}

GlobalSemanticMap fuse_maps(const std::vector<LocalSemanticMap>& maps,
                            const ClusterAssignment& assignment,
                            const GridSpec& grid) {
  std::unordered_map<std::uint64_t, int> global_of;
  global_of.reserve(assignment.registry.size());
  for (std::size_t i = 0; i < assignment.registry.size(); ++i) {
    global_of[ref_key(assignment.registry[i].robot_id,
                      assignment.registry[i].topic_id)] = assignment.labels[i];
  }

  GlobalSemanticMap out;
  out.grid = grid;
  out.num_global_labels = assignment.num_global_labels;
  out.labels.assign(grid.cell_count(), -1);
  out.source_robot.assign(grid.cell_count(), -1);
  out.source_timestep.assign(grid.cell_count(), -1);

  for (const LocalSemanticMap& map : maps) {
    for (const LocalSemanticMap::Entry& entry : map.cells) {
      if (!grid.contains(entry.cell)) {
        throw std::invalid_argument("local map cell outside grid");
      }
      const auto it = global_of.find(ref_key(map.robot_id, entry.label));
      if (it == global_of.end()) {
        throw std::invalid_argument("local label missing from assignment");
      }
      const int cur_robot = out.source_robot[entry.cell];
      const int cur_time = out.source_timestep[entry.cell];
      const bool wins = cur_robot < 0 || entry.timestep > cur_time ||
                        (entry.timestep == cur_time && map.robot_id < cur_robot);
      if (wins) {
        out.labels[entry.cell] = it->second;
        out.source_robot[entry.cell] = map.robot_id;
        out.source_timestep[entry.cell] = entry.timestep;
      }
    }
  }
  return out;
}

void write_global_map_csv(std::ostream& os, const GlobalSemanticMap& map) {
  for (int y = 0; y < map.grid.height; ++y) {
    for (int x = 0; x < map.grid.width; ++x) {
      if (x) os << ',';
      os << map.labels[map.grid.cell_at(x, y)];
    }
    os << '\n';
  }
}

void write_global_map_ppm(std::ostream& os, const GlobalSemanticMap& map) {
  write_ppm(os, map.grid, map.labels);
}

void write_ground_truth_ppm(std::ostream& os, const GroundTruthMap& map) {
  write_ppm(os, map.grid, map.labels);
}

}  // namespace semfuse
