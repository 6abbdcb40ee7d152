#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixprod/embedding_rank.hpp"
#include "mixprod/independence.hpp"

namespace mixprod {

enum class StructuralVerdict {
  finite_confounder,        // low joint rank behind all-pairs dependence
  high_rank_inconclusive,   // dependence present but no small component count
  not_pairwise_dependent,   // some pair already tests independent
};

// Outcome of the structural screen: pairwise dependence tests plus, when all
// pairs are dependent, the component-count estimate that decides between a
// finite confounder and everything else.
struct CausalVerdict {
  StructuralVerdict verdict = StructuralVerdict::not_pairwise_dependent;
  int confounder_states = 0;  // set when verdict == finite_confounder
  std::optional<RankEstimate> rank;  // absent when the screen short-circuits
  Eigen::MatrixXd pairwise_p;        // d x d, symmetric, ones on the diagonal
  int threshold_used = 5;
  double alpha = 0.05;
  std::vector<std::string> caveats;
  std::string recommendation;
};

// Issues a structural verdict for the dataset: every variable pair is tested
// for dependence with a permutation HSIC test; if any pair passes at alpha
// the variables cannot share one finite confounder and the verdict is
// not_pairwise_dependent. Otherwise the component count is estimated, and a
// majority rank below rank_threshold yields finite_confounder with that many
// states; anything else is high_rank_inconclusive, since a direct causal
// link or a continuous confounder also produces high rank. Untestable
// assumptions ride along as caveats.
CausalVerdict infer_structure(
    const Eigen::MatrixXd& data, int rank_threshold = 5, double alpha = 0.05,
    int num_permutations = 200, std::uint64_t seed = 0,
    BandwidthRule rule = BandwidthRule::neighborhood);

struct PairProfile {
  double p_value = 1.0;  // permutation HSIC p-value of the pair
  int rank = 0;          // two-variable component-count estimate
};

// Dependence strength and component count for a single pair of columns;
// weaker dependence generally collapses the estimated rank toward 1.
PairProfile dependence_rank_profile(const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& b,
                                    std::uint64_t seed = 0);

}  // namespace mixprod
