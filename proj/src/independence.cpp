#include "mixprod/independence.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>
#include <random>

namespace mixprod {

namespace {

void check_pair(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l) {
  if (k.rows() != k.cols() || l.rows() != l.cols()) {
    throw Error(ErrorCode::invalid_argument, "kernel matrices must be square");
  }
  if (k.rows() != l.rows()) {
    throw Error(ErrorCode::invalid_argument,
                "kernel matrices disagree on the sample size");
  }
  if (k.rows() < 4) {
    throw Error(ErrorCode::sample_too_small,
                "independence testing needs at least four points");
  }
}

Eigen::MatrixXd center(const Eigen::MatrixXd& m) {
  Eigen::RowVectorXd col_means = m.colwise().mean();
  Eigen::VectorXd row_means = m.rowwise().mean();
  double grand = col_means.mean();
  Eigen::MatrixXd c = m;
  c.rowwise() -= col_means;
  c.colwise() -= row_means;
  c.array() += grand;
  return c;
}

double clamp_p(double p) {
  return std::min(1.0, std::max(kMinPValue, p));
}

// Gamma fit of the permutation null (two matched moments). Returns false when
// the sample is too small or a moment degenerates.
bool gamma_pvalue(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l,
                  double statistic, double& p_out) {
  const Eigen::Index n = k.rows();
  if (n < 6) return false;  // the variance factor needs n - 5 > 0
  const double nd = static_cast<double>(n);

  Eigen::MatrixXd kc = center(k);
  Eigen::MatrixXd lc = center(l);
  double test_stat = nd * statistic;

  Eigen::ArrayXXd b = (kc.array() * lc.array() / 6.0).square();
  double var = (b.sum() - b.matrix().trace()) / (nd * (nd - 1.0));
  var *= 72.0 * (nd - 4.0) * (nd - 5.0) /
         (nd * (nd - 1.0) * (nd - 2.0) * (nd - 3.0));

  double mu_k = (k.sum() - k.trace()) / (nd * (nd - 1.0));
  double mu_l = (l.sum() - l.trace()) / (nd * (nd - 1.0));
  double mean = (1.0 + mu_k * mu_l - mu_k - mu_l) / nd;

  if (!(var > 0.0) || !(mean > 0.0)) return false;

  double shape = mean * mean / var;
  double scale = var * nd / mean;
  double x = std::max(0.0, test_stat / scale);
  p_out = clamp_p(boost::math::gamma_q(shape, x));
  return true;
}

double permutation_pvalue(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l,
                          int num_permutations, std::uint64_t seed) {
  const int n = static_cast<int>(k.rows());
  Eigen::MatrixXd kc = center(k);

  // One consistent estimator for the observed and the permuted statistics:
  // trace(Kc L_perm), identity permutation first.
  auto permuted_sum = [&](const std::vector<int>& p) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double* lcol = l.col(p[static_cast<std::size_t>(j)]).data();
      const double* kcol = kc.col(j).data();
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        s += kcol[i] * lcol[p[static_cast<std::size_t>(i)]];
      }
      acc += s;
    }
    return acc;
  };

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  const double observed = permuted_sum(perm);

  std::mt19937_64 rng(seed);
  int at_least = 0;
  for (int r = 0; r < num_permutations; ++r) {
    std::shuffle(perm.begin(), perm.end(), rng);
    if (permuted_sum(perm) >= observed) ++at_least;
  }
  return clamp_p((1.0 + at_least) / (1.0 + num_permutations));
}

}  // namespace

double hsic_statistic(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l) {
  check_pair(k, l);
  const double nd = static_cast<double>(k.rows());
  Eigen::MatrixXd kc = center(k);
  Eigen::MatrixXd lc = center(l);
  return (kc.array() * lc.array()).sum() / (nd * nd);
}

HsicResult hsic_pvalue(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l,
                       PValueMethod method, int num_permutations,
                       std::uint64_t seed) {
  check_pair(k, l);
  if (num_permutations < 20) {
    throw Error(ErrorCode::invalid_config,
                "need at least 20 permutations for a meaningful p-value");
  }

  HsicResult result;
  result.statistic = hsic_statistic(k, l);

  if (method == PValueMethod::gamma &&
      gamma_pvalue(k, l, result.statistic, result.p_value)) {
    result.method = PValueMethod::gamma;
    return result;
  }
  result.method = PValueMethod::permutation;
  result.p_value = permutation_pvalue(k, l, num_permutations, seed);
  return result;
}

MutualTestReport mutual_independence_test(const Eigen::MatrixXd& cluster_data,
                                          const BandwidthSet& bandwidths,
                                          double alpha, PValueMethod method,
                                          int num_permutations,
                                          std::uint64_t seed) {
  const Eigen::Index n = cluster_data.rows();
  const Eigen::Index d = cluster_data.cols();
  if (d < 2) {
    throw Error(ErrorCode::invalid_argument,
                "mutual independence needs at least two variables");
  }
  if (n < 4) {
    throw Error(ErrorCode::sample_too_small,
                "mutual independence needs at least four points");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error(ErrorCode::invalid_config, "alpha must lie in (0, 1)");
  }
  if (bandwidths.per_variable.size() != static_cast<std::size_t>(d)) {
    throw Error(ErrorCode::invalid_argument,
                "need exactly one bandwidth per variable");
  }

  std::vector<Eigen::MatrixXd> grams;
  grams.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    grams.push_back(
        rbf_gram(cluster_data.col(j),
                 bandwidths.per_variable[static_cast<std::size_t>(j)])
            .values);
  }

  // suffix[t] = Hadamard product of grams t..d-1
  std::vector<Eigen::MatrixXd> suffix(static_cast<std::size_t>(d));
  suffix[static_cast<std::size_t>(d - 1)] = grams[static_cast<std::size_t>(d - 1)];
  for (Eigen::Index t = d - 2; t >= 0; --t) {
    suffix[static_cast<std::size_t>(t)] =
        grams[static_cast<std::size_t>(t)].cwiseProduct(
            suffix[static_cast<std::size_t>(t + 1)]);
  }

  MutualTestReport report;
  const double factor = static_cast<double>(d - 1);
  report.min_adjusted_p = 1.0;
  for (Eigen::Index t = 0; t + 1 < d; ++t) {
    HsicResult r = hsic_pvalue(grams[static_cast<std::size_t>(t)],
                               suffix[static_cast<std::size_t>(t + 1)], method,
                               num_permutations,
                               mix_seed(seed, static_cast<std::uint64_t>(t)));
    double adjusted = std::min(1.0, factor * r.p_value);
    report.min_adjusted_p = std::min(report.min_adjusted_p, adjusted);
    report.sub_tests.push_back(r);
  }
  report.independent = report.min_adjusted_p > alpha;
  return report;
}

}  // namespace mixprod
