// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "semfuse/similarity.hpp"

namespace semfuse {

/// Unweighted association graph over the team's topics. adjacency(i, j) is
/// 1 when similarity >= sigma, 0 otherwise; the diagonal is 1 because
/// self-similarity is always 1.
struct NoisyAssociationGraph {
  std::vector<TopicRef> registry;
  Eigen::MatrixXd adjacency;
  double sigma = 0.0;
};

/// Consistent multiway correspondence: a global label per registry vertex.
/// Within one robot no two topics share a global label, and every topic is
/// mapped.
struct ClusterAssignment {
  int num_global_labels = 0;
  std::vector<TopicRef> registry;
  std::vector<int> labels;  // parallel to registry

  std::string algorithm;  // provenance
  std::string metric;
  double sigma = 0.0;

  /// Global label for (robot, local topic); throws if unmapped.
  int global_label(int robot_id, int topic_id) const;
};

/// Thresholds the similarity matrix at sigma (edges where s >= sigma).
/// sigma must lie in (0, 1). The tuned default across both similarity
/// metrics is 0.75.
NoisyAssociationGraph build_association_graph(const SimilarityMatrix& sim, double sigma);

inline constexpr double kDefaultSigma = 0.75;

/// Spectral rectification of the association graph into the nearest cluster
/// graph.
///
/// With A the adjacency (unit diagonal), D the diagonal of row sums and
/// L = D - A, the normalized Laplacian is
///   L_nrm = (D + I)^{-1/2} L (D + I)^{-1/2}.
/// The number of global labels is the count of eigenvalues of L_nrm below
/// 0.5 (a margin of 1e-9 around 0.5 counts as below), raised to the largest
/// per-robot topic count when necessary so that a valid assignment exists.
/// Vertices are embedded as the L2-normalized rows of the matrix of the m
/// smallest eigenvectors; m pivot rows are chosen greedily by maximal
/// residual after projection onto the span of already-chosen pivots, and
/// each vertex joins the pivot of highest embedded cosine similarity
/// subject to the one-topic-per-robot-per-cluster constraint (collisions
/// keep the highest-affinity vertex).
ClusterAssignment clear_rectify(const NoisyAssociationGraph& graph);

/// Baseline that assumes robots learned the same topics in the same order:
/// local topic k of every robot maps to global label k.
ClusterAssignment id_based_match(const std::vector<std::pair<int, int>>& topics_per_robot);

enum class AssignmentCost { L1, L2, CosineDistance };

std::string to_string(AssignmentCost cost);
AssignmentCost assignment_cost_from_string(const std::string& name);

/// Sequential pairwise baseline: the first robot's topics seed the global
/// labels; each later robot is matched to the first robot by a rectangular
/// min-cost assignment on descriptor distances, and its unmatched topics
/// open new global labels.
ClusterAssignment hungarian_sequential_match(const std::vector<RobotDescriptors>& robots,
                                             AssignmentCost cost);

struct HungarianResult {
  std::vector<int> row_to_col;  // -1 where a row is unassigned (rows > cols)
  double total_cost = 0.0;
};

/// Optimal min-cost assignment for rectangular matrices; all min(rows, cols)
/// assignments are made. Costs must be finite. O(n^3) in max(rows, cols).
HungarianResult hungarian_solve(const Eigen::MatrixXd& cost);

}  // namespace semfuse
