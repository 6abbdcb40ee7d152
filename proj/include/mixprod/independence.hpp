#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mixprod/kernel.hpp"

namespace mixprod {

// Floor applied to p-values so that log-scores stay finite.
inline constexpr double kMinPValue = 1e-300;

enum class PValueMethod { gamma, permutation };

// Biased HSIC statistic: (1/n^2) * trace(K H L H) with the usual centering
// H = I - 11'/n. Zero iff the centered kernels are uncorrelated; swapping the
// arguments gives the identical value.
double hsic_statistic(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l);

struct HsicResult {
  double statistic = 0.0;
  double p_value = 1.0;
  PValueMethod method = PValueMethod::gamma;  // method actually used
};

// Null p-value for the observed statistic. The gamma method fits the two-
// moment gamma approximation of the permutation null; the permutation method
// re-draws the row/column order of `l` num_permutations times and reports
// (1 + #{permuted >= observed}) / (1 + num_permutations). Tiny samples and
// degenerate moment fits quietly fall back to the permutation method.
HsicResult hsic_pvalue(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l,
                       PValueMethod method, int num_permutations = 200,
                       std::uint64_t seed = 0);

struct MutualTestReport {
  std::vector<HsicResult> sub_tests;  // test t: variable t vs joint rest
  double min_adjusted_p = 1.0;        // Bonferroni-adjusted minimum
  bool independent = false;
};

// Mutual independence screen for the columns of a cluster: tests variable t
// against the joint embedding (Hadamard product of Grams) of variables
// t+1..d, t = 1..d-1, and Bonferroni-adjusts by the number of sub-tests.
MutualTestReport mutual_independence_test(const Eigen::MatrixXd& cluster_data,
                                          const BandwidthSet& bandwidths,
                                          double alpha = 0.05,
                                          PValueMethod method = PValueMethod::gamma,
                                          int num_permutations = 200,
                                          std::uint64_t seed = 0);

}  // namespace mixprod
