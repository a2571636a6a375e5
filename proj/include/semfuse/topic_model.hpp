// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semfuse/rng.hpp"
#include "semfuse/world.hpp"

namespace semfuse {

/// Hyperparameters of the per-robot online topic model. The defaults were
/// fixed by a seeded grid search on the env1 preset (see README "Model
/// defaults"); override them per mission as needed.
struct TopicModelConfig {
  double alpha = 0.1;    // smoothing of the cell-neighborhood topic prior
  double beta = 1.0;     // per-topic word smoothing
  double gamma = 1e-4;   // propensity to open a new topic
  int vocabulary_size = 1000;
  int neighborhood_radius = 1;   // von Neumann radius of the spatial prior
  int refine_sweeps_per_frame = 3;
  int refine_window = 10;  // only this many most recent frames are re-sampled online
  std::uint64_t seed = 0;
};

/// A topic's word distribution, a point on the V-simplex.
struct TopicDescriptor {
  std::vector<double> weights;
};

/// Maximum-likelihood topic label per visited cell, with the time of the
/// last visit. Entries are sorted by cell index.
struct LocalSemanticMap {
  struct Entry {
    int cell = 0;
    int label = 0;
    int timestep = 0;
  };
  int robot_id = 0;
  int num_topics = 0;  // label domain size
  std::vector<Entry> cells;
};

/// Online spatiotemporal topic model for one robot.
///
/// Words are assigned to topics by collapsed Gibbs sampling with a
/// Chinese-restaurant-process option for opening new topics:
///
///   P(topic k | word w, cell)  ∝ (pooled_count(cell, k) + alpha)
///                                * (count(k, w) + beta) / (total(k) + V beta)
///   P(new topic | word w)      ∝ gamma
///
/// where pooled_count pools cell-topic counts over the von Neumann
/// neighborhood of the cell. Each ingested frame triggers
/// refine_sweeps_per_frame Gibbs sweeps over the last refine_window frames
/// only, so per-frame compute stays bounded; refine() re-sweeps the whole
/// history. Topics whose counts drop to zero are garbage-collected and the
/// surviving topics are compacted.
///
/// Deterministic: a fixed (config, frame sequence) reproduces the state
/// exactly. A TopicModel instance is single-threaded; distinct instances
/// are independent.
class TopicModel {
 public:
  struct Frame {
    int cell = 0;
    int timestep = 0;
    std::vector<int> words;   // one entry per word token
    std::vector<int> topics;  // parallel to words
    bool operator==(const Frame&) const = default;
  };

  TopicModel(int robot_id, const GridSpec& grid, const TopicModelConfig& config);

  /// Assigns topics to every word of the frame, then runs the windowed
  /// refinement sweeps. Rejects word ids outside [0, V).
  void ingest(const ObservationFrame& frame);

  /// Runs `sweeps` full Gibbs sweeps over all retained frames, then
  /// garbage-collects empty topics. Returns the old-to-new remap for the
  /// topic ids that existed at the call (-1 marks a dead topic), so label
  /// references held by callers stay translatable. sweeps == 0 is the
  /// identity.
  std::vector<int> refine(int sweeps);

  /// One descriptor per live topic: normalized (word counts + beta).
  std::vector<TopicDescriptor> descriptors() const;

  /// Argmax topic per visited cell, ties broken toward the lowest topic id.
  LocalSemanticMap local_map() const;

  int num_topics() const { return static_cast<int>(topic_totals_.size()); }
  int robot_id() const { return robot_id_; }
  const GridSpec& grid() const { return grid_; }
  const TopicModelConfig& config() const { return cfg_; }

  const std::vector<Frame>& frames() const { return frames_; }
  const std::vector<std::vector<long long>>& topic_word_counts() const {
    return topic_word_counts_;
  }
  const std::vector<long long>& topic_totals() const { return topic_totals_; }
  long long cell_topic_count(int cell, int topic) const;
  int last_visit(int cell) const { return last_visit_[cell]; }

  /// How many times each frame has been swept since ingestion.
  const std::vector<int>& frame_sweep_counts() const { return frame_sweeps_; }

  /// Exact integer check that the count tables match the assignments.
  bool tables_consistent() const;

  std::string rng_state() const { return rng_.state(); }

  /// Rebuilds a model from checkpointed assignments. Count tables are
  /// reconstructed from the frames; throws if the result is inconsistent.
  static TopicModel restore(int robot_id, const GridSpec& grid,
                            const TopicModelConfig& config,
                            const std::vector<Frame>& frames,
                            const std::string& rng_state);

 private:
  void rebuild_tables();
  std::vector<long long> pooled_counts(int cell) const;
  int sample_topic(int word, const std::vector<long long>& pool);
  void refine_frames(std::size_t begin, std::size_t end, int sweeps);
  std::vector<int> compact_topics();
  void add_count(int cell, int topic, int word, int delta);
  int create_topic();

  int robot_id_;
  GridSpec grid_;
  TopicModelConfig cfg_;
  std::vector<Frame> frames_;
  std::vector<std::vector<long long>> topic_word_counts_;  // [K][V]
  std::vector<long long> topic_totals_;                    // [K]
  std::vector<std::vector<long long>> cell_topic_counts_;  // [cells][<=K]
  std::vector<int> last_visit_;                            // [cells], -1 unvisited
  std::vector<int> frame_sweeps_;
  std::vector<double> cdf_scratch_;
  Rng rng_;
};

}  // namespace semfuse
