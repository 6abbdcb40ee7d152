#include "mixprod/simulate.hpp"

#include <cmath>
#include <random>

namespace mixprod {

namespace {

MarginalSpec draw_spec(std::mt19937_64& rng) {
  MarginalSpec spec;
  std::uniform_int_distribution<int> fam(0, 3);
  switch (fam(rng)) {
    case 0: {
      spec.family = MarginalFamily::normal;
      static const double sds[] = {0.7, 1.0, 1.3};
      spec.param_a = sds[std::uniform_int_distribution<int>(0, 2)(rng)];
      break;
    }
    case 1: {
      spec.family = MarginalFamily::student_t;
      static const double dfs[] = {3.0, 10.0};
      spec.param_a = dfs[std::uniform_int_distribution<int>(0, 1)(rng)];
      break;
    }
    case 2: {
      spec.family = MarginalFamily::stretched_beta;
      static const double grid[] = {0.5, 1.0};
      spec.param_a = grid[std::uniform_int_distribution<int>(0, 1)(rng)];
      spec.param_b = grid[std::uniform_int_distribution<int>(0, 1)(rng)];
      break;
    }
    default:
      spec.family = MarginalFamily::two_normal_mix;
      break;
  }
  return spec;
}

double sample_marginal(const MarginalSpec& spec, std::mt19937_64& rng) {
  switch (spec.family) {
    case MarginalFamily::normal:
      return std::normal_distribution<double>(0.0, spec.param_a)(rng);
    case MarginalFamily::student_t:
      return std::student_t_distribution<double>(spec.param_a)(rng);
    case MarginalFamily::stretched_beta: {
      double a = spec.param_a, b = spec.param_b;
      double g1 = std::gamma_distribution<double>(a, 1.0)(rng);
      double g2 = std::gamma_distribution<double>(b, 1.0)(rng);
      double x = (g1 + g2 > 0.0) ? g1 / (g1 + g2) : 0.5;
      double mean = a / (a + b);
      double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
      return (x - mean) / sd;
    }
    case MarginalFamily::two_normal_mix: {
      double mu = std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : -1.0;
      return std::normal_distribution<double>(mu, std::sqrt(0.7))(rng);
    }
  }
  return 0.0;  // unreachable
}

}  // namespace

SimulatedDataset simulate_confounded(int d, int m, std::uint64_t seed) {
  if (d < 2) {
    throw Error(ErrorCode::invalid_config,
                "simulation needs at least two dimensions");
  }
  if (m < 1) {
    throw Error(ErrorCode::invalid_config,
                "number of components must be positive");
  }
  std::mt19937_64 rng(seed);
  const int n = 300 * m;

  SimulatedDataset out;
  out.seed = seed;
  out.components.resize(static_cast<std::size_t>(m));
  for (auto& comp : out.components) {
    comp.per_dimension.resize(static_cast<std::size_t>(d));
  }

  // Marginal shapes first, then the cumulative location layout per dimension:
  // component i sits one ~N(2, 0.3) gap beyond component i-1.
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) {
      out.components[static_cast<std::size_t>(i)]
          .per_dimension[static_cast<std::size_t>(j)] = draw_spec(rng);
    }
  }
  std::normal_distribution<double> gap(2.0, 0.3);
  for (int j = 0; j < d; ++j) {
    double center = 0.0;
    out.components[0].per_dimension[static_cast<std::size_t>(j)].center = 0.0;
    for (int i = 1; i < m; ++i) {
      center += gap(rng);
      out.components[static_cast<std::size_t>(i)]
          .per_dimension[static_cast<std::size_t>(j)].center = center;
    }
  }

  std::uniform_int_distribution<int> pick(1, m);
  out.truth_labels.resize(static_cast<std::size_t>(n));
  out.data.resize(n, d);
  for (int i = 0; i < n; ++i) {
    int z = pick(rng);
    out.truth_labels[static_cast<std::size_t>(i)] = z;
    const ComponentSpec& comp = out.components[static_cast<std::size_t>(z - 1)];
    for (int j = 0; j < d; ++j) {
      const MarginalSpec& spec = comp.per_dimension[static_cast<std::size_t>(j)];
      out.data(i, j) = spec.center + sample_marginal(spec, rng);
    }
  }
  return out;
}

SimulatedDataset simulate_direct_link(int confounder_states,
                                      std::uint64_t seed) {
  if (confounder_states != 1 && confounder_states != 3) {
    throw Error(ErrorCode::invalid_config,
                "direct-link protocol supports 1 or 3 confounder states");
  }
  SimulatedDataset out = simulate_confounded(2, confounder_states, seed);
  out.data.col(1) += 4.0 * out.data.col(0);
  return out;
}

}  // namespace mixprod
