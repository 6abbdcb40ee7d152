#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mixprod/independence.hpp"

namespace mixprod {

// Exact message reported when the iteration budget runs out before every
// cluster tests mutually independent.
inline constexpr const char* kClicFailureMessage =
    "Unable to find appropriate clusters.";

// The screen runs before every sweep, so a sweep that moves nothing always
// follows a screen that failed on exactly those labels: clic() therefore only
// ever reports converged_independent or failed. The middle values name the
// stop reasons for callers that want to distinguish them in reports.
enum class ClicStatus {
  converged_independent,  // final clusters pass the independence screen
  converged_stable,       // reserved: stable labels, screen outcome pending
  max_iterations,         // reserved: budget exhausted, screen outcome pending
  failed,                 // search ended and the screen still fails
};

struct ClicConfig {
  int m = 1;                 // number of clusters
  int c = 1;                 // points reassigned jointly per candidate move
  int max_iterations = 7;
  double alpha = 0.05;
  PValueMethod objective_method = PValueMethod::gamma;
  int num_permutations = 200;
  std::uint64_t seed = 0;
};

struct IterationRecord {
  int iteration = 0;       // 1-based
  double objective = 0.0;  // after the sweep
  int points_moved = 0;
};

// Objective values along the run; values[0] is the initial assignment.
struct ObjectiveTrace {
  std::vector<double> values;

  double final_value() const { return values.back(); }
};

struct ClicResult {
  std::vector<int> labels;  // 1..m
  int m = 0;
  ClicStatus status = ClicStatus::failed;
  ObjectiveTrace trace;
  std::vector<IterationRecord> iterations;
  // last independence screen, one report per cluster (decision-grade
  // permutation p-values)
  std::vector<MutualTestReport> final_cluster_reports;
  std::string message;  // kClicFailureMessage unless independent
};

// Sum over clusters of -log(min adjusted p) from the mutual independence
// screen, with bandwidths recomputed from each cluster's own points. Clusters
// of fewer than four points score as if maximally dependent; an empty cluster
// makes the assignment infeasible (+infinity).
double compute_objective(const Eigen::MatrixXd& data,
                         const std::vector<int>& labels, int m,
                         double alpha = 0.05,
                         PValueMethod method = PValueMethod::gamma,
                         int num_permutations = 200, std::uint64_t seed = 0);

// Greedy search for a relabeling of the rows into m clusters whose variables
// are mutually independent within every cluster: start from seeded uniform
// labels, repeatedly visit the points in random sets of size c and move each
// set to the jointly best cluster word, keeping the incumbent on ties. Stops
// as soon as every cluster passes the independence screen, when a sweep moves
// nothing, or after max_iterations sweeps.
ClicResult clic(const Eigen::MatrixXd& data, const ClicConfig& config);

}  // namespace mixprod
