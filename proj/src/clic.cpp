#include "mixprod/clic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <utility>

namespace mixprod {

namespace {

const double kInfeasible = std::numeric_limits<double>::infinity();
const double kTinyClusterScore = -std::log(kMinPValue);

// Scores one cluster assignment list at a time. Bandwidths always come from
// the cluster's own points (median rule); a dimension that is flat inside the
// cluster borrows the whole-dataset median, and a globally flat dimension
// gets a unit bandwidth, under which its kernel is all ones and inert.
class ClusterScorer {
 public:
  ClusterScorer(const Eigen::MatrixXd& data, double alpha, PValueMethod method,
                int num_permutations, std::uint64_t seed)
      : data_(data),
        alpha_(alpha),
        method_(method),
        num_permutations_(num_permutations),
        seed_(seed),
        fallback_(static_cast<std::size_t>(data.cols()), -1.0) {}

  // -log of the screen's minimum adjusted p-value; the greedy objective.
  double score(const std::vector<int>& members) const {
    if (members.empty()) return kInfeasible;
    if (members.size() < 4) return kTinyClusterScore;
    MutualTestReport r =
        screen(members, method_, mix_seed(seed_, hash_indices(members)));
    return -std::log(r.min_adjusted_p);
  }

  // Decision-grade screen for the stopping rule and the final verdict.
  MutualTestReport verdict(const std::vector<int>& members,
                           std::uint64_t seed) const {
    if (members.size() < 4) {
      MutualTestReport r;
      r.min_adjusted_p = kMinPValue;
      r.independent = false;
      return r;
    }
    return screen(members, PValueMethod::permutation, seed);
  }

 private:
  MutualTestReport screen(const std::vector<int>& members, PValueMethod method,
                          std::uint64_t seed) const {
    const Eigen::Index d = data_.cols();
    Eigen::MatrixXd cluster(static_cast<Eigen::Index>(members.size()), d);
    for (std::size_t r = 0; r < members.size(); ++r) {
      cluster.row(static_cast<Eigen::Index>(r)) = data_.row(members[r]);
    }
    BandwidthSet bw;
    bw.per_variable.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
      double sigma;
      try {
        sigma = bandwidth_median(cluster.col(j));
      } catch (const Error&) {
        sigma = whole_median(j);
      }
      bw.per_variable.push_back(sigma);
    }
    return mutual_independence_test(cluster, bw, alpha_, method,
                                    num_permutations_, seed);
  }

  double whole_median(Eigen::Index j) const {
    double& cached = fallback_[static_cast<std::size_t>(j)];
    if (cached < 0.0) {
      try {
        cached = bandwidth_median(data_.col(j));
      } catch (const Error&) {
        cached = 1.0;
      }
    }
    return cached;
  }

  const Eigen::MatrixXd& data_;
  double alpha_;
  PValueMethod method_;
  int num_permutations_;
  std::uint64_t seed_;
  mutable std::vector<double> fallback_;
};

double sum_terms(const std::vector<double>& terms) {
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

// next word in lexicographic order over {1..m}^len
bool next_word(std::vector<int>& w, int m) {
  for (int pos = static_cast<int>(w.size()) - 1; pos >= 0; --pos) {
    if (w[static_cast<std::size_t>(pos)] < m) {
      ++w[static_cast<std::size_t>(pos)];
      std::fill(w.begin() + pos + 1, w.end(), 1);
      return true;
    }
  }
  return false;
}

void validate_labels(const std::vector<int>& labels, Eigen::Index n, int m) {
  if (labels.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::invalid_argument,
                "need exactly one label per data row");
  }
  for (int z : labels) {
    if (z < 1 || z > m) {
      throw Error(ErrorCode::invalid_argument,
                  "labels must lie in 1..m");
    }
  }
}

}  // namespace

double compute_objective(const Eigen::MatrixXd& data,
                         const std::vector<int>& labels, int m, double alpha,
                         PValueMethod method, int num_permutations,
                         std::uint64_t seed) {
  if (data.cols() < 2) {
    throw Error(ErrorCode::invalid_argument,
                "clustering needs at least two variables");
  }
  if (m < 1) {
    throw Error(ErrorCode::invalid_config, "m must be positive");
  }
  validate_labels(labels, data.rows(), m);

  ClusterScorer scorer(data, alpha, method, num_permutations, seed);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels[i] - 1)].push_back(
        static_cast<int>(i));
  }
  double acc = 0.0;
  for (int k = 0; k < m; ++k) {
    acc += scorer.score(members[static_cast<std::size_t>(k)]);
  }
  return acc;
}

ClicResult clic(const Eigen::MatrixXd& data, const ClicConfig& config) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (d < 2) {
    throw Error(ErrorCode::invalid_argument,
                "clustering needs at least two variables");
  }
  if (!data.allFinite()) {
    throw Error(ErrorCode::invalid_argument,
                "dataset contains a non-finite value");
  }
  if (config.m < 1) {
    throw Error(ErrorCode::invalid_config, "m must be positive");
  }
  if (config.c < 1) {
    throw Error(ErrorCode::invalid_config, "c must be positive");
  }
  if (config.max_iterations < 1) {
    throw Error(ErrorCode::invalid_config, "max_iterations must be positive");
  }
  if (!(config.alpha > 0.0) || !(config.alpha < 1.0)) {
    throw Error(ErrorCode::invalid_config, "alpha must lie in (0, 1)");
  }
  if (config.num_permutations < 20) {
    throw Error(ErrorCode::invalid_config,
                "need at least 20 permutations for a meaningful p-value");
  }
  if (n < static_cast<Eigen::Index>(4) * config.m) {
    throw Error(ErrorCode::invalid_config,
                "need at least four points per requested cluster");
  }
  {
    long long words = 1;
    for (int i = 0; i < config.c; ++i) {
      words *= config.m;
      if (words > 4096) {
        throw Error(ErrorCode::invalid_config,
                    "m^c exceeds 4096 candidate words per set");
      }
    }
  }

  ClusterScorer scorer(data, config.alpha, config.objective_method,
                       config.num_permutations, config.seed);
  std::mt19937_64 rng(config.seed);

  ClicResult result;
  result.m = config.m;
  result.labels.resize(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> members(static_cast<std::size_t>(config.m));
  {
    std::uniform_int_distribution<int> pick(1, config.m);
    for (Eigen::Index i = 0; i < n; ++i) {
      int z = pick(rng);
      result.labels[static_cast<std::size_t>(i)] = z;
      members[static_cast<std::size_t>(z - 1)].push_back(static_cast<int>(i));
    }
  }

  std::vector<double> terms(static_cast<std::size_t>(config.m));
  for (int k = 0; k < config.m; ++k) {
    terms[static_cast<std::size_t>(k)] =
        scorer.score(members[static_cast<std::size_t>(k)]);
  }
  result.trace.values.push_back(sum_terms(terms));

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  int completed = 0;
  while (true) {
    // Stopping screen on the current assignment.
    std::uint64_t round_seed =
        mix_seed(config.seed, 1000003ULL + static_cast<std::uint64_t>(completed));
    result.final_cluster_reports.clear();
    bool all_independent = true;
    for (int k = 0; k < config.m; ++k) {
      MutualTestReport r =
          scorer.verdict(members[static_cast<std::size_t>(k)],
                         mix_seed(round_seed, static_cast<std::uint64_t>(k)));
      all_independent = all_independent && r.independent;
      result.final_cluster_reports.push_back(std::move(r));
    }
    if (all_independent) {
      result.status = ClicStatus::converged_independent;
      break;
    }
    if (completed == config.max_iterations) {
      result.status = ClicStatus::failed;
      result.message = kClicFailureMessage;
      break;
    }

    // One greedy sweep over a fresh random partition into sets of size c.
    std::shuffle(order.begin(), order.end(), rng);
    int moved_total = 0;
    for (Eigen::Index start = 0; start < n;
         start += static_cast<Eigen::Index>(config.c)) {
      const Eigen::Index len =
          std::min<Eigen::Index>(config.c, n - start);
      std::vector<int> set_points(order.begin() + start,
                                  order.begin() + start + len);
      std::vector<int> incumbent(static_cast<std::size_t>(len));
      for (Eigen::Index j = 0; j < len; ++j) {
        incumbent[static_cast<std::size_t>(j)] =
            result.labels[static_cast<std::size_t>(set_points[static_cast<std::size_t>(j)])];
      }

      const double base_obj = sum_terms(terms);
      double best_obj = base_obj;
      std::vector<int> best_word = incumbent;
      std::vector<std::pair<int, std::pair<std::vector<int>, double>>>
          best_touched;  // cluster -> (new members, new term)

      std::map<std::pair<int, std::vector<int>>, double> memo;
      std::vector<int> word(static_cast<std::size_t>(len), 1);
      do {
        if (word == incumbent) continue;

        // new member lists for the clusters this word touches
        std::map<int, std::vector<int>> fresh;
        bool any_change = false;
        for (Eigen::Index j = 0; j < len; ++j) {
          int from = incumbent[static_cast<std::size_t>(j)];
          int to = word[static_cast<std::size_t>(j)];
          if (from == to) continue;
          any_change = true;
          int point = set_points[static_cast<std::size_t>(j)];
          for (int k : {from, to}) {
            if (!fresh.count(k)) {
              fresh[k] = members[static_cast<std::size_t>(k - 1)];
            }
          }
          auto& src = fresh[from];
          src.erase(std::lower_bound(src.begin(), src.end(), point));
          auto& dst = fresh[to];
          dst.insert(std::lower_bound(dst.begin(), dst.end(), point), point);
        }
        if (!any_change) continue;  // word relabels nothing

        std::vector<std::pair<int, std::pair<std::vector<int>, double>>>
            touched;
        double obj = 0.0;
        auto it = fresh.begin();
        for (int k = 1; k <= config.m; ++k) {
          if (it != fresh.end() && it->first == k) {
            auto key = std::make_pair(k, it->second);
            auto found = memo.find(key);
            double t;
            if (found != memo.end()) {
              t = found->second;
            } else {
              t = scorer.score(it->second);
              memo.emplace(key, t);
            }
            obj += t;
            touched.emplace_back(k, std::make_pair(std::move(it->second), t));
            ++it;
          } else {
            obj += terms[static_cast<std::size_t>(k - 1)];
          }
        }

        if (obj < best_obj) {  // strict: ties keep the incumbent word
          best_obj = obj;
          best_word = word;
          best_touched = std::move(touched);
        }
      } while (next_word(word, config.m));

      if (best_word != incumbent) {
        for (Eigen::Index j = 0; j < len; ++j) {
          if (best_word[static_cast<std::size_t>(j)] !=
              incumbent[static_cast<std::size_t>(j)]) {
            ++moved_total;
            result.labels[static_cast<std::size_t>(
                set_points[static_cast<std::size_t>(j)])] =
                best_word[static_cast<std::size_t>(j)];
          }
        }
        for (auto& [k, update] : best_touched) {
          members[static_cast<std::size_t>(k - 1)] = std::move(update.first);
          terms[static_cast<std::size_t>(k - 1)] = update.second;
        }
      }
    }

    ++completed;
    result.trace.values.push_back(sum_terms(terms));
    result.iterations.push_back(
        IterationRecord{completed, result.trace.values.back(), moved_total});
    if (moved_total == 0) {
      // The screen above already rejected exactly these labels, and with no
      // accepted move every later sweep would re-evaluate the same
      // candidates, so the budget cannot rescue the run.
      result.status = ClicStatus::failed;
      result.message = kClicFailureMessage;
      break;
    }
  }

  return result;
}

}  // namespace mixprod
