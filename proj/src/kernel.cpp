#include "mixprod/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mixprod {

double median_in_place(std::vector<double>& values) {
  if (values.empty()) {
    throw Error(ErrorCode::invalid_argument, "median of an empty collection");
  }
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

namespace {

void check_column(const Eigen::VectorXd& column) {
  if (column.size() < 2) {
    throw Error(ErrorCode::invalid_argument,
                "kernel input needs at least two values");
  }
  if (!column.allFinite()) {
    throw Error(ErrorCode::invalid_argument,
                "kernel input contains a non-finite value");
  }
}

}  // namespace

GramMatrix rbf_gram(const Eigen::VectorXd& column, double sigma) {
  check_column(column);
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw Error(ErrorCode::invalid_bandwidth,
                "bandwidth must be finite and positive, got " +
                    std::to_string(sigma));
  }
  const Eigen::Index n = column.size();
  const double scale = 1.0 / (2.0 * sigma * sigma);
  GramMatrix g;
  g.bandwidth = sigma;
  g.values.resize(n, n);
  const Eigen::ArrayXd v = column.array();
  for (Eigen::Index q = 0; q < n; ++q) {
    g.values.col(q) = (-(v - v[q]).square() * scale).exp().matrix();
  }
  // mirror one triangle so the matrix is symmetric to the last bit
  g.values.triangularView<Eigen::StrictlyUpper>() = g.values.transpose();
  g.values.diagonal().setOnes();
  return g;
}

double bandwidth_median(const Eigen::VectorXd& column) {
  check_column(column);
  const Eigen::Index n = column.size();
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back(std::abs(column[i] - column[j]));
    }
  }
  double med = median_in_place(dist);
  if (med <= 0.0) {
    throw Error(ErrorCode::degenerate_column,
                "column has no spread: median pairwise distance is zero");
  }
  return med;
}

double bandwidth_neighborhood(const Eigen::MatrixXd& data,
                              Eigen::Index variable, int k_neighbors,
                              NeighborhoodDistances mode) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (d < 2) {
    throw Error(ErrorCode::invalid_argument,
                "neighborhood rule needs at least two variables");
  }
  if (variable < 0 || variable >= d) {
    throw Error(ErrorCode::invalid_argument, "variable index out of range");
  }
  if (k_neighbors < 1) {
    throw Error(ErrorCode::invalid_config, "k_neighbors must be positive");
  }
  if (n <= k_neighbors) {
    throw Error(ErrorCode::sample_too_small,
                "neighborhood rule needs more rows than k_neighbors");
  }
  if (!data.allFinite()) {
    throw Error(ErrorCode::invalid_argument,
                "dataset contains a non-finite value");
  }

  // Squared distances over the complement of `variable`.
  Eigen::MatrixXd rest(n, d - 1);
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (j != variable) rest.col(c++) = data.col(j);
  }
  const Eigen::VectorXd col = data.col(variable);

  std::vector<std::pair<double, Eigen::Index>> order;
  std::vector<double> collected;
  collected.reserve(static_cast<std::size_t>(n) * k_neighbors);
  std::vector<Eigen::Index> hood(static_cast<std::size_t>(k_neighbors) + 1);

  for (Eigen::Index i = 0; i < n; ++i) {
    order.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double sq = (rest.row(j) - rest.row(i)).squaredNorm();
      order.emplace_back(sq, j);
    }
    // ties go to the lower row index; pair ordering gives exactly that
    std::partial_sort(order.begin(), order.begin() + k_neighbors, order.end());
    if (mode == NeighborhoodDistances::point_to_neighbor) {
      for (int k = 0; k < k_neighbors; ++k) {
        collected.push_back(std::abs(col[i] - col[order[k].second]));
      }
    } else {
      hood[0] = i;
      for (int k = 0; k < k_neighbors; ++k) hood[k + 1] = order[k].second;
      for (std::size_t a = 0; a < hood.size(); ++a) {
        for (std::size_t b = a + 1; b < hood.size(); ++b) {
          collected.push_back(std::abs(col[hood[a]] - col[hood[b]]));
        }
      }
    }
  }

  double med = median_in_place(collected);
  if (med > 0.0) return med;
  return bandwidth_median(col);  // throws degenerate_column if flat too
}

BandwidthSet select_bandwidths(const Eigen::MatrixXd& data, BandwidthRule rule,
                               int k_neighbors) {
  BandwidthSet set;
  set.per_variable.reserve(static_cast<std::size_t>(data.cols()));
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    try {
      double bw = rule == BandwidthRule::median
                      ? bandwidth_median(data.col(j))
                      : bandwidth_neighborhood(data, j, k_neighbors);
      set.per_variable.push_back(bw);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (variable " +
                                std::to_string(j + 1) + ")");
    }
  }
  return set;
}

}  // namespace mixprod
