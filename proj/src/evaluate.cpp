#include "mixprod/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixprod/common.hpp"

namespace mixprod {

namespace {

// Rows rescaled per variable so the product kernel collapses to
// exp(-squared euclidean distance) on the scaled points.
Eigen::MatrixXd scale_rows(const Eigen::MatrixXd& x, const BandwidthSet& bw) {
  Eigen::MatrixXd scaled(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    scaled.col(j) =
        x.col(j) / (std::sqrt(2.0) * bw.per_variable[static_cast<std::size_t>(j)]);
  }
  return scaled;
}

// mean over all pairs (rows of a) x (rows of b) of the scaled kernel,
// diagonal included
double kernel_mean(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd sq = -2.0 * a * b.transpose();
  sq.colwise() += na;
  sq.rowwise() += nb.transpose();
  // rounding can push a zero distance a hair negative
  return (-sq.array().max(0.0)).exp().mean();
}

}  // namespace

double mmd_squared(const Eigen::MatrixXd& sample_a,
                   const Eigen::MatrixXd& sample_b,
                   const BandwidthSet& bandwidths) {
  if (sample_a.rows() == 0 || sample_b.rows() == 0) {
    throw Error(ErrorCode::empty_cluster, "cannot embed an empty sample");
  }
  if (sample_a.cols() != sample_b.cols()) {
    throw Error(ErrorCode::invalid_argument,
                "samples disagree on the number of variables");
  }
  if (!sample_a.allFinite() || !sample_b.allFinite()) {
    throw Error(ErrorCode::invalid_argument,
                "sample contains a non-finite value");
  }
  const Eigen::Index d = sample_a.cols();
  if (bandwidths.per_variable.size() != static_cast<std::size_t>(d)) {
    throw Error(ErrorCode::invalid_argument,
                "need exactly one bandwidth per variable");
  }
  for (double sigma : bandwidths.per_variable) {
    if (!std::isfinite(sigma) || sigma <= 0.0) {
      throw Error(ErrorCode::invalid_bandwidth,
                  "bandwidth must be finite and positive, got " +
                      std::to_string(sigma));
    }
  }

  const Eigen::MatrixXd a = scale_rows(sample_a, bandwidths);
  const Eigen::MatrixXd b = scale_rows(sample_b, bandwidths);
  const double value =
      kernel_mean(a, a) + kernel_mean(b, b) - 2.0 * kernel_mean(a, b);
  return std::max(0.0, value);
}

MmdReport match_and_score(const std::vector<int>& output_labels, int m,
                          const std::vector<int>& truth_labels,
                          const Eigen::MatrixXd& data,
                          const BandwidthSet& bandwidths) {
  const Eigen::Index n = data.rows();
  if (m < 1) {
    throw Error(ErrorCode::invalid_config, "m must be positive");
  }
  if (m > 8) {
    throw Error(ErrorCode::invalid_config,
                "matching enumerates all m! bijections; m must stay at most 8");
  }
  if (output_labels.size() != static_cast<std::size_t>(n) ||
      truth_labels.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::invalid_argument,
                "need one output and one truth label per data row");
  }
  for (int z : output_labels) {
    if (z < 1 || z > m) {
      throw Error(ErrorCode::invalid_argument, "labels must lie in 1..m");
    }
  }
  std::vector<char> present(static_cast<std::size_t>(m), 0);
  for (int z : truth_labels) {
    if (z < 1 || z > m) {
      throw Error(ErrorCode::invalid_config,
                  "cluster count must equal the number of distinct truth "
                  "labels");
    }
    present[static_cast<std::size_t>(z - 1)] = 1;
  }
  if (std::count(present.begin(), present.end(), 1) != m) {
    throw Error(ErrorCode::invalid_config,
                "cluster count must equal the number of distinct truth labels");
  }

  auto gather = [&](const std::vector<int>& labels, int which) {
    std::vector<int> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == which) rows.push_back(static_cast<int>(i));
    }
    Eigen::MatrixXd block(static_cast<Eigen::Index>(rows.size()), data.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      block.row(static_cast<Eigen::Index>(r)) = data.row(rows[r]);
    }
    return block;
  };

  Eigen::MatrixXd cells(m, m);
  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXd out = gather(output_labels, i + 1);
    for (int t = 0; t < m; ++t) {
      if (out.rows() == 0) {
        cells(i, t) = kEmptyClusterMmd2;
      } else {
        cells(i, t) = mmd_squared(out, gather(truth_labels, t + 1), bandwidths);
      }
    }
  }

  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<int> best = perm;
  double best_total = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      total += cells(i, perm[static_cast<std::size_t>(i)] - 1);
    }
    if (total < best_total) {  // lexicographically first wins ties
      best_total = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  MmdReport report;
  report.permutation = best;
  report.per_cluster_mmd2.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    report.per_cluster_mmd2[static_cast<std::size_t>(i)] =
        cells(i, best[static_cast<std::size_t>(i)] - 1);
  }
  report.total = best_total;
  return report;
}

}  // namespace mixprod
