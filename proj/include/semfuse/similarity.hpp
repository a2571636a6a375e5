// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "semfuse/topic_model.hpp"

namespace semfuse {

/// Identifies one topic of one robot in a team-wide registry.
struct TopicRef {
  int robot_id = 0;
  int topic_id = 0;
  bool operator==(const TopicRef&) const = default;
};

/// A robot's descriptor set, as shared for matching.
struct RobotDescriptors {
  int robot_id = 0;
  std::vector<TopicDescriptor> descriptors;
};

enum class SimilarityMetric { TopicOverlap, Cosine };

std::string to_string(SimilarityMetric metric);
SimilarityMetric similarity_metric_from_string(const std::string& name);

/// All-pairs similarity over the team's topics. Symmetric, entries in
/// [0, 1], diagonal exactly 1. Row i corresponds to registry[i].
struct SimilarityMatrix {
  std::vector<TopicRef> registry;
  Eigen::MatrixXd scores;
};

/// Probability mass two topics assign in common: 1 - L1(a, b) / 2.
/// Rejects inputs off the simplex (negative weight, or L1 norm more than
/// 1e-6 away from 1).
double topic_overlap(const TopicDescriptor& a, const TopicDescriptor& b);

/// Cosine of the angle between descriptors; in [0, 1] since weights are
/// non-negative. Rejects zero vectors.
double cosine_similarity(const TopicDescriptor& a, const TopicDescriptor& b);

/// Builds the similarity matrix for the given metric. The registry
/// enumerates robots in the order given and topics in local order, so the
/// layout is reproducible.
SimilarityMatrix pairwise_similarity_matrix(const std::vector<RobotDescriptors>& robots,
                                            SimilarityMetric metric);

/// CSV with a "robot:topic" registry header row, for offline inspection.
void write_similarity_csv(std::ostream& os, const SimilarityMatrix& sim);

}  // namespace semfuse
