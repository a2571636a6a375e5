// SPDX-License-Identifier: Apache-2.0
#include "semfuse/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace semfuse {

namespace {

ContingencyTable build_table(const std::map<int, std::map<int, long long>>& joint) {
  // Collect the labels that actually occur; this drops empty rows/columns.
  std::map<int, int> row_index, col_index;
  for (const auto& [u, row] : joint) {
    row_index.emplace(u, 0);
    for (const auto& [v, c] : row) col_index.emplace(v, 0);
  }
  int r = 0;
  for (auto& [u, idx] : row_index) idx = r++;
  int c = 0;
  for (auto& [v, idx] : col_index) idx = c++;

  ContingencyTable table;
  table.counts.assign(row_index.size(), std::vector<long long>(col_index.size(), 0));
  table.row_marginals.assign(row_index.size(), 0);
  table.col_marginals.assign(col_index.size(), 0);
  for (const auto& [u, row] : joint) {
    for (const auto& [v, count] : row) {
      table.counts[row_index[u]][col_index[v]] = count;
      table.row_marginals[row_index[u]] += count;
      table.col_marginals[col_index[v]] += count;
      table.total += count;
    }
  }
  return table;
}

}  // namespace

ContingencyTable contingency(const GroundTruthMap& truth, const GlobalSemanticMap& fused) {
  if (!(truth.grid == fused.grid)) {
    throw std::invalid_argument("ground truth and fused map grids differ");
  }
  std::map<int, std::map<int, long long>> joint;
  for (int cell = 0; cell < truth.grid.cell_count(); ++cell) {
    if (fused.labels[cell] < 0) continue;
    joint[truth.labels[cell]][fused.labels[cell]] += 1;
  }
  return build_table(joint);
}

ContingencyTable contingency_from_labels(const std::vector<int>& u,
                                         const std::vector<int>& v) {
  if (u.size() != v.size()) throw std::invalid_argument("label vectors differ in size");
  std::map<int, std::map<int, long long>> joint;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < 0 || v[i] < 0) continue;
    joint[u[i]][v[i]] += 1;
  }
  return build_table(joint);
}

double mutual_information(const ContingencyTable& table) {
  if (table.total <= 0) throw std::invalid_argument("empty contingency table");
  const double n = static_cast<double>(table.total);
  double mi = 0.0;
  for (std::size_t i = 0; i < table.counts.size(); ++i) {
    for (std::size_t j = 0; j < table.counts[i].size(); ++j) {
      const long long c = table.counts[i][j];
      if (c == 0) continue;
      const double ratio =
          (n * static_cast<double>(c)) /
          (static_cast<double>(table.row_marginals[i]) *
           static_cast<double>(table.col_marginals[j]));
      mi += (static_cast<double>(c) / n) * std::log(ratio);
    }
  }
  return std::max(mi, 0.0);
}

double marginal_entropy(const std::vector<long long>& marginals, long long total) {
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (long long m : marginals) {
    if (m <= 0) continue;
    h += (static_cast<double>(m) / n) * std::log(n / static_cast<double>(m));
  }
  return h;
}

double expected_mi(const std::vector<long long>& row_marginals,
                   const std::vector<long long>& col_marginals, long long total) {
  if (total <= 0) throw std::invalid_argument("total must be positive");
  const double n = static_cast<double>(total);
  double emi = 0.0;
  for (const long long a : row_marginals) {
    for (const long long b : col_marginals) {
      const long long lo = std::max<long long>(1, a + b - total);
      const long long hi = std::min(a, b);
      for (long long nij = lo; nij <= hi; ++nij) {
        const double term =
            (static_cast<double>(nij) / n) *
            std::log((n * static_cast<double>(nij)) /
                     (static_cast<double>(a) * static_cast<double>(b)));
        // Hypergeometric probability of drawing exactly nij co-occurrences,
        // via log-factorials.
        const double log_prob =
            std::lgamma(a + 1) + std::lgamma(b + 1) + std::lgamma(total - a + 1) +
            std::lgamma(total - b + 1) - std::lgamma(total + 1) -
            std::lgamma(nij + 1) - std::lgamma(a - nij + 1) -
            std::lgamma(b - nij + 1) - std::lgamma(total - a - b + nij + 1);
        emi += term * std::exp(log_prob);
      }
    }
  }
  return emi;
}

namespace {

// The partitions coincide exactly when every row and every column of the
// table holds a single nonzero block. AMI is 1 in that case and only then,
// so it is returned exactly instead of through the formula. This also
// covers the both-constant 1x1 table.
bool partitions_identical(const ContingencyTable& table) {
  if (table.counts.size() != table.counts[0].size()) return false;
  std::vector<int> col_nonzeros(table.counts[0].size(), 0);
  for (const auto& row : table.counts) {
    int row_nonzeros = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] != 0) {
        ++row_nonzeros;
        ++col_nonzeros[j];
      }
    }
    if (row_nonzeros != 1) return false;
  }
  for (int c : col_nonzeros) {
    if (c != 1) return false;
  }
  return true;
}

}  // namespace

double ami(const ContingencyTable& table) {
  if (table.total <= 0) throw std::invalid_argument("empty contingency table");
  if (partitions_identical(table)) return 1.0;
  const double mi = mutual_information(table);
  const double emi = expected_mi(table.row_marginals, table.col_marginals, table.total);
  const double h_max = std::max(marginal_entropy(table.row_marginals, table.total),
                                marginal_entropy(table.col_marginals, table.total));
  double denom = h_max - emi;
  // Keep the sign but avoid dividing by an exact zero in degenerate cases.
  const double tiny = 2.220446049250313e-16;
  if (denom >= 0.0 && denom < tiny) denom = tiny;
  if (denom < 0.0 && denom > -tiny) denom = -tiny;
  return (mi - emi) / denom;
}

}  // namespace semfuse
