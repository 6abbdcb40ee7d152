#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mixprod/common.hpp"

namespace mixprod {

enum class MarginalFamily {
  normal,          // sd drawn from {0.7, 1.0, 1.3}
  student_t,       // df drawn from {3, 10}
  stretched_beta,  // alpha, beta from {0.5, 1.0}, rescaled to mean 0 / sd 1
  two_normal_mix,  // equal-weight normals at -1 and +1, variance 0.7 each
};

struct MarginalSpec {
  MarginalFamily family = MarginalFamily::normal;
  double param_a = 1.0;  // sd / df / alpha, by family
  double param_b = 0.0;  // beta for stretched_beta
  double center = 0.0;   // component location in this dimension
};

// Per-component recipe: one marginal per dimension.
struct ComponentSpec {
  std::vector<MarginalSpec> per_dimension;
};

struct SimulatedDataset {
  Eigen::MatrixXd data;          // n x d
  std::vector<int> truth_labels; // values in 1..m
  std::vector<ComponentSpec> components;
  std::uint64_t seed = 0;
};

// Mixture of product distributions: a uniform latent group picks a component,
// dimensions are independent within each component. Component locations per
// dimension are laid out cumulatively with gaps drawn near 2, so neighbouring
// components overlap but stay distinguishable. n = 300 * m.
SimulatedDataset simulate_confounded(int d, int m, std::uint64_t seed);

// Same generator with d = 2 and m = confounder_states (1 or 3), then column 2
// is replaced by column2 + 4 * column1, creating a direct dependence that no
// finite mixture of products explains.
SimulatedDataset simulate_direct_link(int confounder_states,
                                      std::uint64_t seed);

}  // namespace mixprod
