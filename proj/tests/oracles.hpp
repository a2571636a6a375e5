// SPDX-License-Identifier: Apache-2.0
//
// Independent oracles used by the unit and acceptance suites. Everything in
// here deliberately avoids the implementation paths it is checking.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "semfuse/matching.hpp"
#include "semfuse/metrics.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/similarity.hpp"

namespace semfuse::testing {

/// Exhaustive minimum assignment cost over all row->column injections.
inline double brute_force_assignment_cost(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows <= cols) {
    std::vector<int> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (int i = 0; i < rows; ++i) total += cost(i, perm[i]);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  return brute_force_assignment_cost(cost.transpose());
}

/// Random point on the V-simplex (Dirichlet(1)).
inline TopicDescriptor random_simplex_point(Rng& rng, int dim) {
  TopicDescriptor d;
  d.weights.resize(dim);
  double total = 0.0;
  for (int i = 0; i < dim; ++i) {
    d.weights[i] = -std::log(1.0 - rng.uniform());
    total += d.weights[i];
  }
  for (double& w : d.weights) w /= total;
  return d;
}

/// A planted multiway-matching instance: vertices are (robot, topic), each
/// belonging to one of `num_clusters` ground-truth clusters, at most one
/// vertex per robot per cluster.
struct PlantedInstance {
  std::vector<TopicRef> registry;
  std::vector<int> truth;  // planted cluster per vertex
  std::vector<int> topics_per_robot;
  int num_clusters = 0;
  Eigen::MatrixXd adjacency;  // noise-free cluster graph, unit diagonal
};

inline PlantedInstance make_planted_instance(Rng& rng, int num_robots, int num_clusters,
                                             double membership = 1.0) {
  PlantedInstance inst;
  inst.num_clusters = num_clusters;
  inst.topics_per_robot.assign(num_robots, 0);
  std::vector<std::vector<int>> cluster_of_robot(num_robots);
  for (int c = 0; c < num_clusters; ++c) {
    int members = 0;
    for (int r = 0; r < num_robots; ++r) {
      if (rng.uniform() < membership) {
        cluster_of_robot[r].push_back(c);
        ++members;
      }
    }
    if (members == 0) {  // keep every planted cluster non-empty
      cluster_of_robot[rng.uniform_int(num_robots)].push_back(c);
    }
  }
  for (int r = 0; r < num_robots; ++r) {
    if (cluster_of_robot[r].empty()) {
      cluster_of_robot[r].push_back(rng.uniform_int(num_clusters));
    }
    // Local topic ids deliberately scramble the cluster order.
    rng.shuffle(cluster_of_robot[r]);
    for (std::size_t t = 0; t < cluster_of_robot[r].size(); ++t) {
      inst.registry.push_back({r, static_cast<int>(t)});
      inst.truth.push_back(cluster_of_robot[r][t]);
    }
    inst.topics_per_robot[r] = static_cast<int>(cluster_of_robot[r].size());
  }
  const int n = static_cast<int>(inst.registry.size());
  inst.adjacency.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      inst.adjacency(i, j) = inst.truth[i] == inst.truth[j] ? 1.0 : 0.0;
    }
  }
  return inst;
}

/// Flips exactly round(rate * |eligible pairs|) distinct off-diagonal
/// pairs. When a registry is given, only cross-robot pairs are eligible:
/// those are the pairs that can carry edges in a cluster graph with the
/// one-topic-per-robot-per-cluster structure.
inline Eigen::MatrixXd flip_edges(const Eigen::MatrixXd& adjacency, double rate, Rng& rng,
                                  const std::vector<TopicRef>* registry = nullptr) {
  const int n = static_cast<int>(adjacency.rows());
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (registry && (*registry)[i].robot_id == (*registry)[j].robot_id) continue;
      pairs.emplace_back(i, j);
    }
  }
  const int flips = static_cast<int>(std::llround(rate * pairs.size()));
  Eigen::MatrixXd out = adjacency;
  for (int f = 0; f < flips; ++f) {
    const int pick = f + rng.uniform_int(static_cast<int>(pairs.size()) - f);
    std::swap(pairs[f], pairs[pick]);
    const auto [i, j] = pairs[f];
    out(i, j) = 1.0 - out(i, j);
    out(j, i) = out(i, j);
  }
  return out;
}

/// Pairwise-match F1 of an assignment against planted clusters: a pair of
/// vertices is a predicted match when it shares a global label. When there
/// are no true pairs and none predicted, agreement is perfect (1.0).
inline double pairwise_f1(const std::vector<int>& predicted, const std::vector<int>& truth) {
  long long tp = 0, fp = 0, fn = 0;
  const int n = static_cast<int>(predicted.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool pred = predicted[i] == predicted[j];
      const bool real = truth[i] == truth[j];
      tp += pred && real;
      fp += pred && !real;
      fn += !pred && real;
    }
  }
  if (2 * tp + fp + fn == 0) return 1.0;
  return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

/// True when two labelings induce the same partition of the index set.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd, bwd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto f = fwd.emplace(a[i], b[i]);
    if (!f.second && f.first->second != b[i]) return false;
    const auto g = bwd.emplace(b[i], a[i]);
    if (!g.second && g.first->second != a[i]) return false;
  }
  return true;
}

/// Expected MI under the permutation model, by exhaustive enumeration of
/// all assignments of one labeling against the other (only feasible for
/// tiny N). Labelings are expanded from marginals.
inline double exact_permutation_emi(const std::vector<long long>& row_marginals,
                                    const std::vector<long long>& col_marginals) {
  std::vector<int> u, v;
  for (std::size_t i = 0; i < row_marginals.size(); ++i) {
    for (long long k = 0; k < row_marginals[i]; ++k) u.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < col_marginals.size(); ++j) {
    for (long long k = 0; k < col_marginals[j]; ++k) v.push_back(static_cast<int>(j));
  }
  std::sort(v.begin(), v.end());
  double total = 0.0;
  long long count = 0;
  do {
    total += mutual_information(contingency_from_labels(u, v));
    ++count;
  } while (std::next_permutation(v.begin(), v.end()));
  // next_permutation over the multiset enumerates each distinct arrangement
  // once, which is exactly the permutation distribution.
  return total / static_cast<double>(count);
}

/// Monte-Carlo permutation estimate of E[MI] with its standard error.
struct MonteCarloEmi {
  double mean = 0.0;
  double std_error = 0.0;
};

inline MonteCarloEmi monte_carlo_emi(const std::vector<long long>& row_marginals,
                                     const std::vector<long long>& col_marginals,
                                     int shuffles, Rng& rng) {
  const int rows = static_cast<int>(row_marginals.size());
  const int cols = static_cast<int>(col_marginals.size());
  std::vector<int> u, v;
  for (int i = 0; i < rows; ++i) {
    for (long long k = 0; k < row_marginals[i]; ++k) u.push_back(i);
  }
  for (int j = 0; j < cols; ++j) {
    for (long long k = 0; k < col_marginals[j]; ++k) v.push_back(j);
  }
  const double n = static_cast<double>(u.size());
  std::vector<long long> counts(rows * cols);
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < shuffles; ++s) {
    rng.shuffle(v);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < u.size(); ++i) counts[u[i] * cols + v[i]] += 1;
    double mi = 0.0;
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        const long long c = counts[i * cols + j];
        if (c == 0) continue;
        mi += (c / n) * std::log((n * c) / (static_cast<double>(row_marginals[i]) *
                                            static_cast<double>(col_marginals[j])));
      }
    }
    sum += mi;
    sum_sq += mi * mi;
  }
  MonteCarloEmi out;
  out.mean = sum / shuffles;
  const double var = std::max(0.0, sum_sq / shuffles - out.mean * out.mean);
  out.std_error = std::sqrt(var / shuffles);
  return out;
}

/// Second implementation of the closed-form E[MI], using the hypergeometric
/// multiplicative recurrence instead of log-factorials.
inline double recurrence_emi(const std::vector<long long>& row_marginals,
                             const std::vector<long long>& col_marginals,
                             long long total) {
  const long double n = static_cast<long double>(total);
  long double emi = 0.0;
  for (const long long a : row_marginals) {
    for (const long long b : col_marginals) {
      const long long lo = std::max<long long>(0, a + b - total);
      const long long hi = std::min(a, b);
      // P(lo) = C(a, lo) C(N-a, b-lo) / C(N, b), then step nij upward with
      // the hypergeometric ratio recurrence.
      auto log_choose = [](long long m, long long k) -> long double {
        long double s = 0.0;
        for (long long t = 0; t < k; ++t) {
          s += std::log(static_cast<long double>(m - t)) -
               std::log(static_cast<long double>(t + 1));
        }
        return s;
      };
      long double prob = std::exp(log_choose(a, lo) + log_choose(total - a, b - lo) -
                                  log_choose(total, b));
      for (long long nij = lo; nij <= hi; ++nij) {
        if (nij > 0) {
          const long double term =
              (static_cast<long double>(nij) / n) *
              std::log((n * static_cast<long double>(nij)) /
                       (static_cast<long double>(a) * static_cast<long double>(b)));
          emi += term * prob;
        }
        // P(nij + 1) from P(nij).
        const long double num = static_cast<long double>(a - nij) *
                                static_cast<long double>(b - nij);
        const long double den = static_cast<long double>(nij + 1) *
                                static_cast<long double>(total - a - b + nij + 1);
        if (den > 0) prob *= num / den;
      }
    }
  }
  return static_cast<double>(emi);
}

}  // namespace semfuse::testing
