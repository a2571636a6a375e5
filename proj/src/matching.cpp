// SPDX-License-Identifier: Apache-2.0
#include "semfuse/matching.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace semfuse {

namespace {

constexpr double kEigenvalueMargin = 1e-9;

double descriptor_cost(const TopicDescriptor& a, const TopicDescriptor& b,
                       AssignmentCost cost) {
  switch (cost) {
    case AssignmentCost::L1: {
      double l1 = 0.0;
      for (std::size_t i = 0; i < a.weights.size(); ++i) {
        l1 += std::abs(a.weights[i] - b.weights[i]);
      }
      return l1;
    }
    case AssignmentCost::L2: {
      double sq = 0.0;
      for (std::size_t i = 0; i < a.weights.size(); ++i) {
        const double d = a.weights[i] - b.weights[i];
        sq += d * d;
      }
      return std::sqrt(sq);
    }
    case AssignmentCost::CosineDistance:
      return 1.0 - cosine_similarity(a, b);
  }
  return 0.0;
}

}  // namespace

int ClusterAssignment::global_label(int robot_id, int topic_id) const {
  for (std::size_t i = 0; i < registry.size(); ++i) {
    if (registry[i].robot_id == robot_id && registry[i].topic_id == topic_id) {
      return labels[i];
    }
  }
  throw std::invalid_argument("topic not present in assignment");
}

NoisyAssociationGraph build_association_graph(const SimilarityMatrix& sim, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) {
    throw std::invalid_argument("sigma must lie in (0, 1)");
  }
  NoisyAssociationGraph graph;
  graph.registry = sim.registry;
  graph.sigma = sigma;
  const int n = static_cast<int>(sim.registry.size());
  graph.adjacency.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      graph.adjacency(i, j) = sim.scores(i, j) >= sigma ? 1.0 : 0.0;
    }
    graph.adjacency(i, i) = 1.0;
  }
  return graph;
}

ClusterAssignment clear_rectify(const NoisyAssociationGraph& graph) {
  const int n = static_cast<int>(graph.registry.size());
  if (n == 0) throw std::invalid_argument("association graph is empty");

  const Eigen::MatrixXd& a = graph.adjacency;
  Eigen::VectorXd degree = a.rowwise().sum();
  Eigen::MatrixXd laplacian = -a;
  for (int i = 0; i < n; ++i) laplacian(i, i) += degree(i);

  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(degree(i) + 1.0);
  Eigen::MatrixXd normalized =
      inv_sqrt.asDiagonal() * laplacian * inv_sqrt.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }

  int num_labels = 0;
  for (int i = 0; i < n; ++i) {
    if (eig.eigenvalues()(i) < 0.5 + kEigenvalueMargin) ++num_labels;
  }

  // A valid assignment needs at least as many labels as any robot has topics.
  std::map<int, int> topics_of_robot;
  for (const TopicRef& ref : graph.registry) topics_of_robot[ref.robot_id] += 1;
  int max_per_robot = 0;
  for (const auto& [robot, count] : topics_of_robot) {
    max_per_robot = std::max(max_per_robot, count);
  }
  num_labels = std::min(std::max(num_labels, max_per_robot), n);

  // Vertex embedding: L2-normalized rows of the m smallest eigenvectors.
  Eigen::MatrixXd embed = eig.eigenvectors().leftCols(num_labels);
  for (int i = 0; i < n; ++i) {
    const double norm = embed.row(i).norm();
    if (norm > 1e-12) embed.row(i) /= norm;
  }

  // Greedy pivot selection by maximal residual after projecting onto the
  // span of the pivots chosen so far (ties toward the lowest row index).
  std::vector<int> pivots;
  Eigen::MatrixXd basis(num_labels, num_labels);  // embedded pivot rows
  Eigen::MatrixXd residual = embed;
  for (int p = 0; p < num_labels; ++p) {
    int best = -1;
    double best_norm = -1.0;
    for (int i = 0; i < n; ++i) {
      const double r = residual.row(i).norm();
      if (r > best_norm + 1e-12) {
        best_norm = r;
        best = i;
      }
    }
    pivots.push_back(best);
    Eigen::RowVectorXd dir = residual.row(best);
    const double norm = dir.norm();
    if (norm > 1e-12) {
      dir /= norm;
      residual -= (residual * dir.transpose()) * dir;
    }
    basis.row(p) = embed.row(pivots[p]);
  }

  // Affinity of every vertex to every pivot in the embedded space.
  Eigen::MatrixXd affinity = embed * basis.transpose();  // n x m

  // Per robot, greedily lock in the highest-affinity (vertex, pivot) pair
  // among pivots the robot has not used yet.
  std::vector<int> labels(n, -1);
  std::vector<std::vector<int>> by_robot;
  {
    std::map<int, std::vector<int>> grouped;
    for (int i = 0; i < n; ++i) grouped[graph.registry[i].robot_id].push_back(i);
    for (auto& [robot, verts] : grouped) by_robot.push_back(std::move(verts));
  }
  for (const std::vector<int>& verts : by_robot) {
    std::vector<bool> used(num_labels, false);
    std::vector<bool> done(verts.size(), false);
    for (std::size_t round = 0; round < verts.size(); ++round) {
      int best_vi = -1, best_p = -1;
      double best_aff = -std::numeric_limits<double>::infinity();
      for (std::size_t vi = 0; vi < verts.size(); ++vi) {
        if (done[vi]) continue;
        for (int p = 0; p < num_labels; ++p) {
          if (used[p]) continue;
          if (affinity(verts[vi], p) > best_aff) {
            best_aff = affinity(verts[vi], p);
            best_vi = static_cast<int>(vi);
            best_p = p;
          }
        }
      }
      labels[verts[best_vi]] = best_p;
      used[best_p] = true;
      done[best_vi] = true;
    }
  }

  ClusterAssignment out;
  out.num_global_labels = num_labels;
  out.registry = graph.registry;
  out.labels = std::move(labels);
  out.algorithm = "clear";
  out.sigma = graph.sigma;
  return out;
}

ClusterAssignment id_based_match(const std::vector<std::pair<int, int>>& topics_per_robot) {
  ClusterAssignment out;
  out.algorithm = "id";
  int max_topics = 0;
  for (const auto& [robot, count] : topics_per_robot) {
    for (int t = 0; t < count; ++t) {
      out.registry.push_back({robot, t});
      out.labels.push_back(t);
    }
    max_topics = std::max(max_topics, count);
  }
  out.num_global_labels = max_topics;
  return out;
}

std::string to_string(AssignmentCost cost) {
  switch (cost) {
    case AssignmentCost::L1: return "l1";
    case AssignmentCost::L2: return "l2";
    case AssignmentCost::CosineDistance: return "cosine";
  }
  return "?";
}

AssignmentCost assignment_cost_from_string(const std::string& name) {
  if (name == "l1") return AssignmentCost::L1;
  if (name == "l2") return AssignmentCost::L2;
  if (name == "cosine") return AssignmentCost::CosineDistance;
  throw std::invalid_argument("unknown assignment cost: " + name);
}

ClusterAssignment hungarian_sequential_match(const std::vector<RobotDescriptors>& robots,
                                             AssignmentCost cost) {
  if (robots.empty()) throw std::invalid_argument("no robots to match");

  ClusterAssignment out;
  out.algorithm = "hungarian";
  out.metric = to_string(cost);

  const std::vector<TopicDescriptor>& seed = robots[0].descriptors;
  const int seed_topics = static_cast<int>(seed.size());
  int next_label = seed_topics;

  for (std::size_t r = 0; r < robots.size(); ++r) {
    const std::vector<TopicDescriptor>& descs = robots[r].descriptors;
    const int k = static_cast<int>(descs.size());
    std::vector<int> label_of(k, -1);

    if (r == 0) {
      for (int t = 0; t < k; ++t) label_of[t] = t;
    } else if (seed_topics > 0 && k > 0) {
      Eigen::MatrixXd costs(seed_topics, k);
      for (int i = 0; i < seed_topics; ++i) {
        for (int j = 0; j < k; ++j) {
          costs(i, j) = descriptor_cost(seed[i], descs[j], cost);
        }
      }
      const HungarianResult match = hungarian_solve(costs);
      for (int i = 0; i < seed_topics; ++i) {
        if (match.row_to_col[i] >= 0) label_of[match.row_to_col[i]] = i;
      }
      for (int j = 0; j < k; ++j) {
        if (label_of[j] < 0) label_of[j] = next_label++;  // unmatched extras
      }
    } else {
      for (int t = 0; t < k; ++t) label_of[t] = next_label++;
    }

    for (int t = 0; t < k; ++t) {
      out.registry.push_back({robots[r].robot_id, t});
      out.labels.push_back(label_of[t]);
    }
  }
  out.num_global_labels = next_label;
  return out;
}

HungarianResult hungarian_solve(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) throw std::invalid_argument("empty cost matrix");
  if (!cost.allFinite()) throw std::invalid_argument("cost matrix has non-finite entries");

  // Pad to square with zero-cost dummy rows/columns; the shortest
  // augmenting path formulation below is 1-indexed.
  const int n = std::max(rows, cols);
  auto at = [&](int i, int j) -> double {
    return (i < rows && j < cols) ? cost(i, j) : 0.0;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  HungarianResult result;
  result.row_to_col.assign(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j];
    if (i >= 1 && i <= rows && j <= cols) {
      result.row_to_col[i - 1] = j - 1;
      result.total_cost += cost(i - 1, j - 1);
    }
  }
  return result;
}

}  // namespace semfuse
