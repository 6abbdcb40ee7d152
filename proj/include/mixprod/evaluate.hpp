#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mixprod/kernel.hpp"

namespace mixprod {

// Score for an output cluster that ended up empty: it cannot be embedded, so
// it counts as maximally mismatched instead of aborting the comparison.
inline constexpr double kEmptyClusterMmd2 = 1.0e6;

// Best bijection between output clusters and truth components under the
// summed squared MMD.
struct MmdReport {
  // output cluster k is matched to truth component permutation[k-1]
  std::vector<int> permutation;
  std::vector<double> per_cluster_mmd2;  // under that matching
  double total = 0.0;
};

// Biased squared maximum mean discrepancy between two samples under the
// product of per-variable Gaussian kernels:
//   mean_{a,a'} k(a,a') + mean_{b,b'} k(b,b') - 2 mean_{a,b} k(a,b)
// with diagonal terms included and the result clamped at zero against
// negative rounding. Both samples share one fixed bandwidth set so their
// embeddings live in the same space.
double mmd_squared(const Eigen::MatrixXd& sample_a,
                   const Eigen::MatrixXd& sample_b,
                   const BandwidthSet& bandwidths);

// Compares a clustering against ground truth: evaluates mmd_squared between
// every output cluster and every truth component, then returns the bijection
// with the smallest total, exhaustively over all m! candidates (the first in
// lexicographic order on ties). Empty output clusters score kEmptyClusterMmd2
// against every component; matching still runs.
MmdReport match_and_score(const std::vector<int>& output_labels, int m,
                          const std::vector<int>& truth_labels,
                          const Eigen::MatrixXd& data,
                          const BandwidthSet& bandwidths);

}  // namespace mixprod
