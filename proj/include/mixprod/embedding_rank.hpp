#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mixprod/kernel.hpp"

namespace mixprod {

// Two-block split of variable indices (0-based). Canonical form keeps
// variable 0 in `left`; both blocks are non-empty and sorted.
struct Bipartition {
  std::vector<int> left;
  std::vector<int> right;
};

// All 2^(d-1) - 1 canonical bipartitions of {0, ..., d-1}, in a fixed order.
std::vector<Bipartition> canonical_bipartitions(int d);

// Kernel evaluation of the joint sample against itself, with the variables
// collapsed into the two groups of a bipartition:
//   entry (p, q) = (1/n) * sum_i  prod_{j in left} k_j(x_i, x_p)
//                               * prod_{j in right} k_j(x_i, x_q).
// Its rank reflects the number of mixture components that explain the data
// as a mixture of products across the split.
struct GroupedEmbeddingMatrix {
  Eigen::MatrixXd values;
  Bipartition bipartition;
};

GroupedEmbeddingMatrix grouped_matrix(const std::vector<GramMatrix>& grams,
                                      const Bipartition& bipartition);

// Rank of a noisy spectrum: look only at the singular values whose cumulative
// share of the total lies inside [window_low, window_high] and return the
// index with the sharpest relative drop to its successor. `squared_variance`
// switches the cumulative share to squared singular values.
int estimate_rank(const Eigen::VectorXd& singular_values,
                  double window_low = 0.90, double window_high = 0.99999,
                  bool squared_variance = false);

// Most frequent value; ties go to the smaller one.
int majority_rank(const std::vector<int>& ranks);

struct PartitionRank {
  Bipartition bipartition;
  int rank = 0;
  Eigen::VectorXd singular_values;  // descending, full profile
};

struct RankEstimate {
  std::vector<PartitionRank> per_partition;
  int majority = 0;  // most frequent rank; ties go to the smaller value
};

// Rank vote over every canonical bipartition of the dataset's variables.
// Exact SVD per bipartition; guarded to n <= 2000 rows (subsample beyond).
RankEstimate estimate_components(const Eigen::MatrixXd& data,
                                 const BandwidthSet& bandwidths,
                                 double window_low = 0.90,
                                 double window_high = 0.99999,
                                 bool squared_variance = false);

}  // namespace mixprod
