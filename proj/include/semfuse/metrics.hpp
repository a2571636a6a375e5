// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "semfuse/fusion.hpp"
#include "semfuse/world.hpp"

namespace semfuse {

/// Joint label-count table between two labelings of the same cells. Rows
/// index ground-truth labels, columns fused labels; empty rows and columns
/// are dropped at construction.
struct ContingencyTable {
  std::vector<std::vector<long long>> counts;
  std::vector<long long> row_marginals;
  std::vector<long long> col_marginals;
  long long total = 0;
};

/// Counts cells labeled in both maps (unobserved fused cells are excluded).
/// Throws when the grids differ.
ContingencyTable contingency(const GroundTruthMap& truth, const GlobalSemanticMap& fused);

/// Builds a table from two parallel label vectors; pairs where either label
/// is negative are skipped.
ContingencyTable contingency_from_labels(const std::vector<int>& u,
                                         const std::vector<int>& v);

/// Mutual information in nats; non-negative, zero iff the labelings are
/// independent. Requires a non-empty table.
double mutual_information(const ContingencyTable& table);

/// Entropy (nats) of a marginal count vector.
double marginal_entropy(const std::vector<long long>& marginals, long long total);

/// Expected mutual information between random labelings with the given
/// fixed marginals, under the hypergeometric permutation model (closed-form
/// sum over all feasible per-pair co-occurrence counts).
double expected_mi(const std::vector<long long>& row_marginals,
                   const std::vector<long long>& col_marginals, long long total);

/// Adjusted Mutual Information with max-entropy normalization:
///   (MI - E[MI]) / (max(H_row, H_col) - E[MI]).
/// Exactly 1 for identical partitions, about 0 for independent labelings.
/// When both labelings are constant the partitions coincide trivially and
/// the score is defined as 1.
double ami(const ContingencyTable& table);

}  // namespace semfuse
