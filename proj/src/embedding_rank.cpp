#include "mixprod/embedding_rank.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mixprod {

namespace {

constexpr int kMaxVariables = 16;    // 2^(d-1)-1 partitions beyond is absurd
constexpr Eigen::Index kMaxRows = 2000;  // exact SVD guard

void check_partition(const Bipartition& part, int d) {
  std::vector<char> seen(static_cast<std::size_t>(d), 0);
  if (part.left.empty() || part.right.empty()) {
    throw Error(ErrorCode::invalid_argument, "bipartition block is empty");
  }
  auto visit = [&](const std::vector<int>& block) {
    for (int j : block) {
      if (j < 0 || j >= d || seen[static_cast<std::size_t>(j)]) {
        throw Error(ErrorCode::invalid_argument,
                    "bipartition is not a disjoint cover of the variables");
      }
      seen[static_cast<std::size_t>(j)] = 1;
    }
  };
  visit(part.left);
  visit(part.right);
  for (char s : seen) {
    if (!s) {
      throw Error(ErrorCode::invalid_argument,
                  "bipartition is not a disjoint cover of the variables");
    }
  }
}

Eigen::MatrixXd hadamard_group(const std::vector<GramMatrix>& grams,
                               const std::vector<int>& block) {
  Eigen::MatrixXd prod = grams[static_cast<std::size_t>(block[0])].values;
  for (std::size_t k = 1; k < block.size(); ++k) {
    prod.array() *= grams[static_cast<std::size_t>(block[k])].values.array();
  }
  return prod;
}

}  // namespace

std::vector<Bipartition> canonical_bipartitions(int d) {
  if (d < 2) {
    throw Error(ErrorCode::invalid_argument,
                "bipartitions need at least two variables");
  }
  if (d > kMaxVariables) {
    throw Error(ErrorCode::dataset_too_large,
                "too many variables to enumerate bipartitions");
  }
  const unsigned full = (1u << d) - 1u;
  std::vector<Bipartition> parts;
  parts.reserve((1u << (d - 1)) - 1u);
  for (unsigned mask = 1u; mask < full; ++mask) {
    if (!(mask & 1u)) continue;  // canonical: variable 0 stays left
    Bipartition p;
    for (int j = 0; j < d; ++j) {
      if (mask & (1u << j)) {
        p.left.push_back(j);
      } else {
        p.right.push_back(j);
      }
    }
    parts.push_back(std::move(p));
  }
  return parts;
}

GroupedEmbeddingMatrix grouped_matrix(const std::vector<GramMatrix>& grams,
                                      const Bipartition& bipartition) {
  if (grams.size() < 2) {
    throw Error(ErrorCode::invalid_argument,
                "grouped evaluation needs at least two variables");
  }
  const Eigen::Index n = grams.front().size();
  for (const GramMatrix& g : grams) {
    if (g.size() != n) {
      throw Error(ErrorCode::invalid_argument,
                  "gram matrices disagree on the sample size");
    }
  }
  check_partition(bipartition, static_cast<int>(grams.size()));

  Eigen::MatrixXd k_left = hadamard_group(grams, bipartition.left);
  Eigen::MatrixXd k_right = hadamard_group(grams, bipartition.right);

  GroupedEmbeddingMatrix out;
  out.bipartition = bipartition;
  out.values.noalias() = k_left.transpose() * k_right;
  out.values /= static_cast<double>(n);
  return out;
}

int estimate_rank(const Eigen::VectorXd& singular_values, double window_low,
                  double window_high, bool squared_variance) {
  const Eigen::Index len = singular_values.size();
  if (len == 0) {
    throw Error(ErrorCode::invalid_argument, "empty spectrum");
  }
  if (!(window_low > 0.0) || !(window_low < window_high) ||
      !(window_high <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "variance window must satisfy "
                                           "0 < low < high <= 1");
  }
  for (Eigen::Index i = 0; i < len; ++i) {
    if (!std::isfinite(singular_values[i]) || singular_values[i] < 0.0 ||
        (i > 0 && singular_values[i] > singular_values[i - 1])) {
      throw Error(ErrorCode::invalid_argument,
                  "spectrum must be non-negative and descending");
    }
  }

  auto weight = [&](double sv) { return squared_variance ? sv * sv : sv; };
  double total = 0.0;
  for (Eigen::Index i = 0; i < len; ++i) total += weight(singular_values[i]);
  if (total == 0.0) {
    throw Error(ErrorCode::degenerate_spectrum, "all singular values are zero");
  }

  // Candidate counts i whose cumulative share sits inside the window; if the
  // window is empty, fall back to the first count that reaches it.
  std::vector<int> candidates;
  int first_reaching = 0;
  double prefix = 0.0;
  for (Eigen::Index i = 0; i < len; ++i) {
    prefix += weight(singular_values[i]);
    double share = prefix / total;
    int count = static_cast<int>(i) + 1;
    if (first_reaching == 0 && share >= window_low) first_reaching = count;
    if (share >= window_low && share <= window_high &&
        singular_values[i] > 0.0) {
      candidates.push_back(count);
    }
  }
  if (candidates.empty()) candidates.push_back(first_reaching);

  int best = candidates.front();
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int count : candidates) {
    double next = count < len ? singular_values[count] : 0.0;
    double ratio = next / singular_values[count - 1];
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = count;
    }
  }
  return best;
}

int majority_rank(const std::vector<int>& ranks) {
  if (ranks.empty()) {
    throw Error(ErrorCode::invalid_argument, "no ranks to vote on");
  }
  std::map<int, int> votes;
  for (int r : ranks) ++votes[r];
  int best = 0, best_count = 0;
  for (const auto& [rank, count] : votes) {
    if (count > best_count) {  // map is ordered, so ties keep the smaller rank
      best = rank;
      best_count = count;
    }
  }
  return best;
}

RankEstimate estimate_components(const Eigen::MatrixXd& data,
                                 const BandwidthSet& bandwidths,
                                 double window_low, double window_high,
                                 bool squared_variance) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (d < 2) {
    throw Error(ErrorCode::invalid_argument,
                "component counting needs at least two variables");
  }
  if (n < 3) {
    throw Error(ErrorCode::sample_too_small,
                "component counting needs at least three rows");
  }
  if (n > kMaxRows) {
    throw Error(ErrorCode::dataset_too_large,
                "exact factorization is limited to 2000 rows; "
                "subsample the dataset first");
  }
  if (bandwidths.per_variable.size() != static_cast<std::size_t>(d)) {
    throw Error(ErrorCode::invalid_argument,
                "need exactly one bandwidth per variable");
  }

  std::vector<GramMatrix> grams;
  grams.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    grams.push_back(
        rbf_gram(data.col(j), bandwidths.per_variable[static_cast<std::size_t>(j)]));
  }

  RankEstimate out;
  std::vector<int> ranks;
  for (const Bipartition& part : canonical_bipartitions(static_cast<int>(d))) {
    GroupedEmbeddingMatrix v = grouped_matrix(grams, part);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(v.values);
    PartitionRank pr;
    pr.bipartition = part;
    pr.singular_values = svd.singularValues();
    pr.rank = estimate_rank(pr.singular_values, window_low, window_high,
                            squared_variance);
    ranks.push_back(pr.rank);
    out.per_partition.push_back(std::move(pr));
  }
  out.majority = majority_rank(ranks);
  return out;
}

}  // namespace mixprod
