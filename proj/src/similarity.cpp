// SPDX-License-Identifier: Apache-2.0
#include "semfuse/similarity.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace semfuse {

namespace {

void check_simplex(const TopicDescriptor& d) {
  double sum = 0.0;
  for (double w : d.weights) {
    if (w < 0.0) throw std::invalid_argument("descriptor weight is negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument("descriptor is not on the simplex");
  }
}

void check_same_size(const TopicDescriptor& a, const TopicDescriptor& b) {
  if (a.weights.size() != b.weights.size()) {
    throw std::invalid_argument("descriptor sizes differ");
  }
}

}  // namespace

std::string to_string(SimilarityMetric metric) {
  return metric == SimilarityMetric::TopicOverlap ? "to" : "cosine";
}

SimilarityMetric similarity_metric_from_string(const std::string& name) {
  if (name == "to") return SimilarityMetric::TopicOverlap;
  if (name == "cosine") return SimilarityMetric::Cosine;
  throw std::invalid_argument("unknown similarity metric: " + name);
}

double topic_overlap(const TopicDescriptor& a, const TopicDescriptor& b) {
  check_same_size(a, b);
  check_simplex(a);
  check_simplex(b);
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    l1 += std::abs(a.weights[i] - b.weights[i]);
  }
  const double score = 1.0 - 0.5 * l1;
  return std::clamp(score, 0.0, 1.0);
}

double cosine_similarity(const TopicDescriptor& a, const TopicDescriptor& b) {
  check_same_size(a, b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    dot += a.weights[i] * b.weights[i];
    na += a.weights[i] * a.weights[i];
    nb += b.weights[i] * b.weights[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("cosine similarity of a zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

SimilarityMatrix pairwise_similarity_matrix(const std::vector<RobotDescriptors>& robots,
                                            SimilarityMetric metric) {
  SimilarityMatrix sim;
  for (const RobotDescriptors& r : robots) {
    for (std::size_t t = 0; t < r.descriptors.size(); ++t) {
      sim.registry.push_back({r.robot_id, static_cast<int>(t)});
    }
  }
  const int n = static_cast<int>(sim.registry.size());
  if (n == 0) throw std::invalid_argument("no topics to compare");

  std::vector<const TopicDescriptor*> flat;
  flat.reserve(n);
  for (const RobotDescriptors& r : robots) {
    for (const TopicDescriptor& d : r.descriptors) flat.push_back(&d);
  }

  sim.scores.resize(n, n);
  for (int i = 0; i < n; ++i) {
    sim.scores(i, i) = 1.0;  // exact, protects downstream thresholding
    for (int j = i + 1; j < n; ++j) {
      const double s = metric == SimilarityMetric::TopicOverlap
                           ? topic_overlap(*flat[i], *flat[j])
                           : cosine_similarity(*flat[i], *flat[j]);
      sim.scores(i, j) = s;
      sim.scores(j, i) = s;
    }
  }
  return sim;
}

void write_similarity_csv(std::ostream& os, const SimilarityMatrix& sim) {
  const int n = static_cast<int>(sim.registry.size());
  for (int i = 0; i < n; ++i) {
    os << (i ? "," : "") << sim.registry[i].robot_id << ':' << sim.registry[i].topic_id;
  }
  os << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) os << ',';
      os << sim.scores(i, j);
    }
    os << '\n';
  }
}

}  // namespace semfuse
