#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mixprod/common.hpp"

namespace mixprod {

// Gram matrix of a single variable under a Gaussian kernel, together with the
// bandwidth that produced it. Symmetric, unit diagonal, entries in [0, 1].
struct GramMatrix {
  Eigen::MatrixXd values;
  double bandwidth = 0.0;

  Eigen::Index size() const { return values.rows(); }
};

// One positive bandwidth per variable of a dataset.
struct BandwidthSet {
  std::vector<double> per_variable;
};

enum class BandwidthRule { median, neighborhood };

// How bandwidth_neighborhood turns a neighborhood into distances:
// point_to_neighbor collects |x_j(i) - x_j(neighbor)| for each neighbor,
// all_pairs collects the distances between all points of {i} + neighbors.
enum class NeighborhoodDistances { point_to_neighbor, all_pairs };

// k(x, x') = exp(-(x - x')^2 / (2 sigma^2)) evaluated on all pairs.
GramMatrix rbf_gram(const Eigen::VectorXd& column, double sigma);

// Median of all n(n-1)/2 pairwise absolute differences.
double bandwidth_median(const Eigen::VectorXd& column);

// For each point, take its k nearest neighbours measured over every variable
// except `variable`, collect the distances in dimension `variable` from the
// point to each neighbour, and return the median of the n*k collected values.
// Captures within-group scale when the other variables pick out neighbours
// from the same group. Falls back to bandwidth_median when the result is 0.
double bandwidth_neighborhood(
    const Eigen::MatrixXd& data, Eigen::Index variable, int k_neighbors = 10,
    NeighborhoodDistances mode = NeighborhoodDistances::point_to_neighbor);

// Applies the chosen rule to every variable. Errors are annotated with the
// offending column.
BandwidthSet select_bandwidths(const Eigen::MatrixXd& data, BandwidthRule rule,
                               int k_neighbors = 10);

}  // namespace mixprod
