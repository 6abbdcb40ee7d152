#include "mixprod/causal.hpp"

#include <string>

#include "mixprod/common.hpp"

namespace mixprod {

namespace {

void attach_caveats(CausalVerdict& out, Eigen::Index d) {
  out.caveats.push_back(
      "assumes at most one hidden common cause behind the observed "
      "variables; several distinct confounders are indistinguishable from "
      "one with more states");
  out.caveats.push_back(
      "assumes the hidden variable is not caused by any observed variable");
  if (d == 2) {
    out.caveats.push_back(
        "with only two observed variables the mixture is generally not "
        "identifiable, so this verdict carries reduced confidence");
  }
}

}  // namespace

CausalVerdict infer_structure(const Eigen::MatrixXd& data, int rank_threshold,
                              double alpha, int num_permutations,
                              std::uint64_t seed, BandwidthRule rule) {
  const Eigen::Index d = data.cols();
  if (d < 2) {
    throw Error(ErrorCode::invalid_argument,
                "structure inference needs at least two variables");
  }
  if (!data.allFinite()) {
    throw Error(ErrorCode::invalid_argument,
                "dataset contains a non-finite value");
  }
  if (rank_threshold < 1) {
    throw Error(ErrorCode::invalid_config, "rank threshold must be positive");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error(ErrorCode::invalid_config, "alpha must lie in (0, 1)");
  }

  CausalVerdict out;
  out.threshold_used = rank_threshold;
  out.alpha = alpha;
  attach_caveats(out, d);

  BandwidthSet bandwidths = select_bandwidths(data, rule);
  std::vector<GramMatrix> grams;
  grams.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    grams.push_back(rbf_gram(
        data.col(j), bandwidths.per_variable[static_cast<std::size_t>(j)]));
  }

  out.pairwise_p = Eigen::MatrixXd::Ones(d, d);
  bool all_dependent = true;
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a + 1; b < d; ++b) {
      HsicResult h = hsic_pvalue(
          grams[static_cast<std::size_t>(a)].values,
          grams[static_cast<std::size_t>(b)].values, PValueMethod::permutation,
          num_permutations,
          mix_seed(seed, static_cast<std::uint64_t>(a * d + b)));
      out.pairwise_p(a, b) = h.p_value;
      out.pairwise_p(b, a) = h.p_value;
      all_dependent = all_dependent && h.p_value < alpha;
    }
  }

  if (!all_dependent) {
    out.verdict = StructuralVerdict::not_pairwise_dependent;
    out.recommendation =
        "at least one variable pair tests independent, so one shared "
        "confounder cannot explain the data; analyze dependent subsets "
        "separately";
    return out;
  }

  out.rank = estimate_components(data, bandwidths);
  const int k = out.rank->majority;
  if (k < rank_threshold) {
    out.verdict = StructuralVerdict::finite_confounder;
    out.confounder_states = k;
    out.recommendation =
        "all pairs are dependent and the component count is small: a hidden "
        "confounder with " +
        std::to_string(k) +
        " states explains the data; cluster the sample with m = " +
        std::to_string(k);
  } else {
    out.verdict = StructuralVerdict::high_rank_inconclusive;
    out.recommendation =
        "all pairs are dependent but the component count is not small; a "
        "direct causal link or a continuous confounder fits the data as well "
        "as a finite one, so no structure can be singled out";
  }
  return out;
}

PairProfile dependence_rank_profile(const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& b,
                                    std::uint64_t seed) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::invalid_argument,
                "columns disagree on the sample size");
  }
  if (a.size() < 10) {
    throw Error(ErrorCode::sample_too_small,
                "pair profiling needs at least ten points");
  }
  Eigen::MatrixXd data(a.size(), 2);
  data.col(0) = a;
  data.col(1) = b;
  if (!data.allFinite()) {
    throw Error(ErrorCode::invalid_argument,
                "column contains a non-finite value");
  }

  BandwidthSet bandwidths =
      select_bandwidths(data, BandwidthRule::neighborhood);
  GramMatrix ka = rbf_gram(data.col(0), bandwidths.per_variable[0]);
  GramMatrix kb = rbf_gram(data.col(1), bandwidths.per_variable[1]);
  PairProfile profile;
  profile.p_value = hsic_pvalue(ka.values, kb.values,
                                PValueMethod::permutation, 200,
                                mix_seed(seed, 1))
                        .p_value;
  profile.rank = estimate_components(data, bandwidths).majority;
  return profile;
}

}  // namespace mixprod
