// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "semfuse/matching.hpp"
#include "semfuse/topic_model.hpp"

namespace semfuse {

/// Team-wide semantic map. Unobserved cells carry label -1; every labeled
/// cell records which robot's map (and which visit) it came from.
struct GlobalSemanticMap {
  GridSpec grid;
  int num_global_labels = 0;
  std::vector<int> labels;           // row-major, -1 for unobserved
  std::vector<int> source_robot;     // -1 for unobserved
  std::vector<int> source_timestep;  // -1 for unobserved

  double coverage_fraction() const;
};

/// Fuses local maps through the correspondence: each observed cell takes
/// the label of the robot that visited it most recently (equal timestamps
/// break toward the lowest robot id), translated to the global label set.
/// A local label missing from the assignment is a hard error.
GlobalSemanticMap fuse_maps(const std::vector<LocalSemanticMap>& maps,
                            const ClusterAssignment& assignment,
                            const GridSpec& grid);

/// Row-major CSV, one grid row per line, -1 for unobserved cells.
void write_global_map_csv(std::ostream& os, const GlobalSemanticMap& map);

/// Binary PPM (P6) with a fixed palette, one pixel per cell, black for
/// unobserved. Intended for eyeballing fused maps next to ground truth.
void write_global_map_ppm(std::ostream& os, const GlobalSemanticMap& map);

/// Same rendering for a ground-truth map.
void write_ground_truth_ppm(std::ostream& os, const GroundTruthMap& map);

}  // namespace semfuse
