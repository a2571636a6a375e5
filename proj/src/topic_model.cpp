// SPDX-License-Identifier: Apache-2.0
#include "semfuse/topic_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace semfuse {

TopicModel::TopicModel(int robot_id, const GridSpec& grid,
                       const TopicModelConfig& config)
    : robot_id_(robot_id),
      grid_(grid),
      cfg_(config),
      cell_topic_counts_(grid.cell_count()),
      last_visit_(grid.cell_count(), -1),
      rng_(derive_seed(config.seed, static_cast<std::uint64_t>(robot_id), 0x70D)) {
  if (cfg_.alpha <= 0.0 || cfg_.beta <= 0.0 || cfg_.gamma <= 0.0) {
    throw std::invalid_argument("alpha, beta, gamma must be > 0");
  }
  if (cfg_.vocabulary_size < 1) {
    throw std::invalid_argument("vocabulary_size must be >= 1");
  }
  if (cfg_.neighborhood_radius < 0 || cfg_.refine_sweeps_per_frame < 0 ||
      cfg_.refine_window < 1) {
    throw std::invalid_argument("invalid topic model config");
  }
}

long long TopicModel::cell_topic_count(int cell, int topic) const {
  const auto& row = cell_topic_counts_[cell];
  return topic < static_cast<int>(row.size()) ? row[topic] : 0;
}

void TopicModel::add_count(int cell, int topic, int word, int delta) {
  auto& row = cell_topic_counts_[cell];
  if (topic >= static_cast<int>(row.size())) row.resize(topic + 1, 0);
  row[topic] += delta;
  topic_word_counts_[topic][word] += delta;
  topic_totals_[topic] += delta;
}

int TopicModel::create_topic() {
  topic_word_counts_.emplace_back(cfg_.vocabulary_size, 0);
  topic_totals_.push_back(0);
  return static_cast<int>(topic_totals_.size()) - 1;
}

std::vector<long long> TopicModel::pooled_counts(int cell) const {
  std::vector<long long> pool(topic_totals_.size(), 0);
  const int r = cfg_.neighborhood_radius;
  const int cx = grid_.x_of(cell);
  const int cy = grid_.y_of(cell);
  for (int dy = -r; dy <= r; ++dy) {
    const int rem = r - std::abs(dy);
    for (int dx = -rem; dx <= rem; ++dx) {
      const int nx = cx + dx;
      const int ny = cy + dy;
      if (nx < 0 || nx >= grid_.width || ny < 0 || ny >= grid_.height) continue;
      const auto& row = cell_topic_counts_[grid_.cell_at(nx, ny)];
      for (std::size_t k = 0; k < row.size(); ++k) pool[k] += row[k];
    }
  }
  return pool;
}

int TopicModel::sample_topic(int word, const std::vector<long long>& pool) {
  const int num_topics = static_cast<int>(topic_totals_.size());
  const double vbeta = cfg_.vocabulary_size * cfg_.beta;
  double total = 0.0;
  cdf_scratch_.resize(num_topics + 1);
  for (int k = 0; k < num_topics; ++k) {
    const double like =
        (topic_word_counts_[k][word] + cfg_.beta) / (topic_totals_[k] + vbeta);
    total += (pool[k] + cfg_.alpha) * like;
    cdf_scratch_[k] = total;
  }
  total += cfg_.gamma;  // new-topic option
  cdf_scratch_[num_topics] = total;

  const double u = rng_.uniform() * total;
  int k = static_cast<int>(
      std::lower_bound(cdf_scratch_.begin(), cdf_scratch_.end(), u) - cdf_scratch_.begin());
  if (k > num_topics) k = num_topics;
  return k;  // == num_topics means "open a new topic"
}

void TopicModel::ingest(const ObservationFrame& frame) {
  if (!grid_.contains(frame.cell)) {
    throw std::invalid_argument("frame cell outside grid");
  }
  for (const auto& [word, count] : frame.word_counts) {
    if (word < 0 || word >= cfg_.vocabulary_size) {
      throw std::invalid_argument("word id outside vocabulary");
    }
    if (count < 0) throw std::invalid_argument("negative word count");
  }

  Frame f;
  f.cell = frame.cell;
  f.timestep = frame.timestep;
  for (const auto& [word, count] : frame.word_counts) {
    for (int i = 0; i < count; ++i) f.words.push_back(word);
  }
  f.topics.assign(f.words.size(), -1);

  std::vector<long long> pool = pooled_counts(f.cell);
  for (std::size_t i = 0; i < f.words.size(); ++i) {
    int k = sample_topic(f.words[i], pool);
    if (k == static_cast<int>(topic_totals_.size())) {
      k = create_topic();
      pool.push_back(0);
    }
    f.topics[i] = k;
    add_count(f.cell, k, f.words[i], +1);
    ++pool[k];
  }

  frames_.push_back(std::move(f));
  frame_sweeps_.push_back(0);
  last_visit_[frame.cell] = frame.timestep;

  const std::size_t end = frames_.size();
  const std::size_t begin =
      end > static_cast<std::size_t>(cfg_.refine_window) ? end - cfg_.refine_window : 0;
  refine_frames(begin, end, cfg_.refine_sweeps_per_frame);
  compact_topics();
}

void TopicModel::refine_frames(std::size_t begin, std::size_t end, int sweeps) {
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t fi = begin; fi < end; ++fi) {
      Frame& f = frames_[fi];
      std::vector<long long> pool = pooled_counts(f.cell);
      for (std::size_t i = 0; i < f.words.size(); ++i) {
        const int old = f.topics[i];
        add_count(f.cell, old, f.words[i], -1);
        --pool[old];
        int k = sample_topic(f.words[i], pool);
        if (k == static_cast<int>(topic_totals_.size())) {
          k = create_topic();
          pool.push_back(0);
        }
        f.topics[i] = k;
        add_count(f.cell, k, f.words[i], +1);
        ++pool[k];
      }
      ++frame_sweeps_[fi];
    }
  }
}

std::vector<int> TopicModel::refine(int sweeps) {
  if (sweeps < 0) throw std::invalid_argument("sweeps must be >= 0");
  const int before = num_topics();
  if (sweeps == 0) {
    std::vector<int> identity(before);
    for (int k = 0; k < before; ++k) identity[k] = k;
    return identity;
  }
  refine_frames(0, frames_.size(), sweeps);
  std::vector<int> remap = compact_topics();
  // Callers only hold ids that existed when refine was called; drop the
  // entries for topics born during the sweeps.
  remap.resize(before);
  return remap;
}

std::vector<int> TopicModel::compact_topics() {
  const int num = static_cast<int>(topic_totals_.size());
  std::vector<int> remap(num, -1);
  int next = 0;
  for (int k = 0; k < num; ++k) {
    if (topic_totals_[k] > 0) remap[k] = next++;
  }
  if (next == num) return remap;  // nothing died

  for (int k = 0; k < num; ++k) {
    if (remap[k] >= 0 && remap[k] != k) {
      topic_word_counts_[remap[k]] = std::move(topic_word_counts_[k]);
      topic_totals_[remap[k]] = topic_totals_[k];
    }
  }
  topic_word_counts_.resize(next);
  topic_totals_.resize(next);

  for (auto& row : cell_topic_counts_) {
    if (row.empty()) continue;
    const std::size_t old_size = row.size();
    for (std::size_t k = 0; k < old_size; ++k) {
      const long long count = row[k];
      row[k] = 0;
      if (count != 0) row[remap[k]] = count;  // remap[k] <= k, safe in place
    }
    if (old_size > static_cast<std::size_t>(next)) row.resize(next);
  }
  for (Frame& f : frames_) {
    for (int& t : f.topics) t = remap[t];
  }
  return remap;
}

std::vector<TopicDescriptor> TopicModel::descriptors() const {
  std::vector<TopicDescriptor> out;
  out.reserve(topic_totals_.size());
  const double vbeta = cfg_.vocabulary_size * cfg_.beta;
  for (std::size_t k = 0; k < topic_totals_.size(); ++k) {
    TopicDescriptor d;
    d.weights.resize(cfg_.vocabulary_size);
    const double denom = topic_totals_[k] + vbeta;
    for (int w = 0; w < cfg_.vocabulary_size; ++w) {
      d.weights[w] = (topic_word_counts_[k][w] + cfg_.beta) / denom;
    }
    out.push_back(std::move(d));
  }
  return out;
}

LocalSemanticMap TopicModel::local_map() const {
  LocalSemanticMap map;
  map.robot_id = robot_id_;
  map.num_topics = num_topics();
  for (int cell = 0; cell < grid_.cell_count(); ++cell) {
    const auto& row = cell_topic_counts_[cell];
    int best = -1;
    long long best_count = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] > best_count) {  // ties keep the lowest topic id
        best_count = row[k];
        best = static_cast<int>(k);
      }
    }
    if (best >= 0) map.cells.push_back({cell, best, last_visit_[cell]});
  }
  return map;
}

bool TopicModel::tables_consistent() const {
  std::vector<std::vector<long long>> tw(topic_totals_.size(),
                                         std::vector<long long>(cfg_.vocabulary_size, 0));
  std::vector<long long> totals(topic_totals_.size(), 0);
  std::vector<std::vector<long long>> ct(grid_.cell_count());
  for (const Frame& f : frames_) {
    for (std::size_t i = 0; i < f.words.size(); ++i) {
      const int k = f.topics[i];
      if (k < 0 || k >= static_cast<int>(topic_totals_.size())) return false;
      tw[k][f.words[i]] += 1;
      totals[k] += 1;
      auto& row = ct[f.cell];
      if (k >= static_cast<int>(row.size())) row.resize(k + 1, 0);
      row[k] += 1;
    }
  }
  if (tw != topic_word_counts_ || totals != topic_totals_) return false;
  for (int cell = 0; cell < grid_.cell_count(); ++cell) {
    const auto& stored = cell_topic_counts_[cell];
    const auto& rebuilt = ct[cell];
    const std::size_t n = std::max(stored.size(), rebuilt.size());
    for (std::size_t k = 0; k < n; ++k) {
      const long long a = k < stored.size() ? stored[k] : 0;
      const long long b = k < rebuilt.size() ? rebuilt[k] : 0;
      if (a != b) return false;
    }
  }
  // Every topic must be live after an operation.
  for (long long t : topic_totals_) {
    if (t <= 0) return false;
  }
  return true;
}

TopicModel TopicModel::restore(int robot_id, const GridSpec& grid,
                               const TopicModelConfig& config,
                               const std::vector<Frame>& frames,
                               const std::string& rng_state) {
  TopicModel model(robot_id, grid, config);
  model.frames_ = frames;
  model.frame_sweeps_.assign(frames.size(), 0);
  model.rebuild_tables();
  model.rng_.restore(rng_state);
  if (!model.tables_consistent()) {
    throw std::runtime_error("checkpoint is internally inconsistent");
  }
  return model;
}

void TopicModel::rebuild_tables() {
  int max_topic = -1;
  for (const Frame& f : frames_) {
    if (!grid_.contains(f.cell)) throw std::runtime_error("checkpoint cell outside grid");
    if (f.words.size() != f.topics.size()) {
      throw std::runtime_error("checkpoint words/topics length mismatch");
    }
    for (std::size_t i = 0; i < f.words.size(); ++i) {
      if (f.words[i] < 0 || f.words[i] >= cfg_.vocabulary_size) {
        throw std::runtime_error("checkpoint word outside vocabulary");
      }
      if (f.topics[i] < 0) throw std::runtime_error("checkpoint topic id negative");
      max_topic = std::max(max_topic, f.topics[i]);
    }
  }
  topic_word_counts_.assign(max_topic + 1,
                            std::vector<long long>(cfg_.vocabulary_size, 0));
  topic_totals_.assign(max_topic + 1, 0);
  cell_topic_counts_.assign(grid_.cell_count(), {});
  std::fill(last_visit_.begin(), last_visit_.end(), -1);
  for (const Frame& f : frames_) {
    for (std::size_t i = 0; i < f.words.size(); ++i) {
      add_count(f.cell, f.topics[i], f.words[i], +1);
    }
    last_visit_[f.cell] = std::max(last_visit_[f.cell], f.timestep);
  }
}

}  // namespace semfuse
