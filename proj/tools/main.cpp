// mixprod: simulate product-mixture data, estimate the component count,
// cluster by within-cluster independence, score clusterings, and issue
// structural verdicts. Reports are JSON on stdout; exit code 0 on success,
// 1 when the analysis itself fails (clustering could not reach independent
// clusters), 2 for usage, configuration, parse, and I/O problems.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <json.hpp>
#include <string>
#include <vector>

#include "mixprod/causal.hpp"
#include "mixprod/clic.hpp"
#include "mixprod/csv.hpp"
#include "mixprod/embedding_rank.hpp"
#include "mixprod/evaluate.hpp"
#include "mixprod/simulate.hpp"

using mixprod::BandwidthRule;
using mixprod::Error;
using mixprod::ErrorCode;
using ordered_json = nlohmann::ordered_json;

namespace {

struct RunConfig {
  std::uint64_t seed = 0;
  double alpha = 0.05;
  int c = 1;
  int max_iterations = 7;
  int rank_threshold = 5;
  std::string pvalue_method = "gamma";
  int num_permutations = 200;
  std::string bandwidth_rule = "neighborhood";
};

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_bandwidth: return "invalid_bandwidth";
    case ErrorCode::degenerate_column: return "degenerate_column";
    case ErrorCode::degenerate_spectrum: return "degenerate_spectrum";
    case ErrorCode::sample_too_small: return "sample_too_small";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::empty_cluster: return "empty_cluster";
    case ErrorCode::dataset_too_large: return "dataset_too_large";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::parse_error: return "parse_error";
  }
  return "error";
}

const char* status_name(mixprod::ClicStatus status) {
  switch (status) {
    case mixprod::ClicStatus::converged_independent:
      return "converged_independent";
    case mixprod::ClicStatus::converged_stable: return "converged_stable";
    case mixprod::ClicStatus::max_iterations: return "max_iterations";
    case mixprod::ClicStatus::failed: return "failed";
  }
  return "unknown";
}

const char* verdict_name(mixprod::StructuralVerdict verdict) {
  switch (verdict) {
    case mixprod::StructuralVerdict::finite_confounder:
      return "finite_confounder";
    case mixprod::StructuralVerdict::high_rank_inconclusive:
      return "high_rank_inconclusive";
    case mixprod::StructuralVerdict::not_pairwise_dependent:
      return "not_pairwise_dependent";
  }
  return "unknown";
}

mixprod::PValueMethod method_of(const RunConfig& config) {
  return config.pvalue_method == "permutation"
             ? mixprod::PValueMethod::permutation
             : mixprod::PValueMethod::gamma;
}

BandwidthRule rule_of(const RunConfig& config) {
  return config.bandwidth_rule == "median" ? BandwidthRule::median
                                           : BandwidthRule::neighborhood;
}

ordered_json config_json(const RunConfig& config) {
  ordered_json j;
  j["seed"] = config.seed;
  j["alpha"] = config.alpha;
  j["c"] = config.c;
  j["max_iterations"] = config.max_iterations;
  j["rank_threshold"] = config.rank_threshold;
  j["pvalue_method"] = config.pvalue_method;
  j["num_permutations"] = config.num_permutations;
  j["bandwidth_rule"] = config.bandwidth_rule;
  return j;
}

ordered_json input_json(const std::string& path,
                        const mixprod::CsvDataset& csv) {
  ordered_json j;
  j["path"] = path;
  j["rows"] = csv.data.rows();
  j["columns"] = csv.data.cols();
  j["has_truth"] = !csv.truth.empty();
  return j;
}

class ReportClock {
 public:
  long long elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void emit(ordered_json& report, const ReportClock& clock) {
  report["timing_ms"] = clock.elapsed_ms();
  std::printf("%s\n", report.dump(2).c_str());
}

void warn_truth_ignored(ordered_json& report, const mixprod::CsvDataset& csv) {
  if (!csv.truth.empty()) {
    report["warnings"].push_back(
        "the truth column is ignored by this command");
  }
}

int cmd_simulate(const std::string& protocol, int d, int m,
                 const std::string& out_path, const RunConfig& config) {
  ReportClock clock;
  mixprod::SimulatedDataset ds =
      protocol == "direct_link"
          ? mixprod::simulate_direct_link(m, config.seed)
          : mixprod::simulate_confounded(d, m, config.seed);
  mixprod::write_dataset_csv(out_path, ds.data, &ds.truth_labels);

  ordered_json report;
  report["command"] = "simulate";
  report["config"] = config_json(config);
  report["results"] = {{"protocol", protocol},
                       {"d", ds.data.cols()},
                       {"m", m},
                       {"rows", ds.data.rows()},
                       {"out", out_path}};
  report["warnings"] = ordered_json::array();
  emit(report, clock);
  return 0;
}

int cmd_rank(const std::string& in_path, const RunConfig& config) {
  ReportClock clock;
  mixprod::CsvDataset csv = mixprod::read_csv(in_path);
  if (csv.data.cols() < 2) {
    throw Error(ErrorCode::invalid_argument,
                "rank estimation needs at least two value columns");
  }
  if (csv.data.rows() < 12) {
    throw Error(ErrorCode::sample_too_small,
                "rank estimation needs at least 12 rows");
  }
  mixprod::BandwidthSet bandwidths =
      mixprod::select_bandwidths(csv.data, rule_of(config));
  mixprod::RankEstimate estimate =
      mixprod::estimate_components(csv.data, bandwidths);

  ordered_json report;
  report["command"] = "rank";
  report["config"] = config_json(config);
  report["input"] = input_json(in_path, csv);
  ordered_json partitions = ordered_json::array();
  for (const mixprod::PartitionRank& p : estimate.per_partition) {
    ordered_json entry;
    entry["left"] = ordered_json::array();
    entry["right"] = ordered_json::array();
    for (int v : p.bipartition.left) entry["left"].push_back(v + 1);
    for (int v : p.bipartition.right) entry["right"].push_back(v + 1);
    entry["rank"] = p.rank;
    entry["singular_values"] = ordered_json::array();
    for (Eigen::Index i = 0; i < p.singular_values.size(); ++i) {
      entry["singular_values"].push_back(p.singular_values[i]);
    }
    partitions.push_back(std::move(entry));
  }
  report["results"] = {{"majority", estimate.majority},
                       {"partitions", std::move(partitions)}};
  report["warnings"] = ordered_json::array();
  warn_truth_ignored(report, csv);
  emit(report, clock);
  return 0;
}

int cmd_cluster(const std::string& in_path, int m, const std::string& out_path,
                const RunConfig& config) {
  ReportClock clock;
  mixprod::CsvDataset csv = mixprod::read_csv(in_path);
  mixprod::ClicConfig clic_config;
  clic_config.m = m;
  clic_config.c = config.c;
  clic_config.max_iterations = config.max_iterations;
  clic_config.alpha = config.alpha;
  clic_config.objective_method = method_of(config);
  clic_config.num_permutations = config.num_permutations;
  clic_config.seed = config.seed;
  mixprod::ClicResult result = mixprod::clic(csv.data, clic_config);
  mixprod::write_labels_csv(out_path, result.labels);

  ordered_json report;
  report["command"] = "cluster";
  report["config"] = config_json(config);
  report["input"] = input_json(in_path, csv);
  ordered_json iterations = ordered_json::array();
  for (const mixprod::IterationRecord& it : result.iterations) {
    iterations.push_back({{"iteration", it.iteration},
                          {"objective", it.objective},
                          {"points_moved", it.points_moved}});
  }
  ordered_json clusters = ordered_json::array();
  std::vector<int> sizes(static_cast<std::size_t>(m), 0);
  for (int z : result.labels) ++sizes[static_cast<std::size_t>(z - 1)];
  for (std::size_t k = 0; k < result.final_cluster_reports.size(); ++k) {
    const mixprod::MutualTestReport& r = result.final_cluster_reports[k];
    clusters.push_back({{"cluster", k + 1},
                        {"size", sizes[k]},
                        {"min_adjusted_p", r.min_adjusted_p},
                        {"independent", r.independent}});
  }
  report["results"] = {{"status", status_name(result.status)},
                       {"message", result.message},
                       {"m", result.m},
                       {"objective_trace", result.trace.values},
                       {"iterations", std::move(iterations)},
                       {"clusters", std::move(clusters)},
                       {"labels_out", out_path}};
  report["warnings"] = ordered_json::array();
  warn_truth_ignored(report, csv);
  emit(report, clock);
  return result.status == mixprod::ClicStatus::converged_independent ? 0 : 1;
}

int cmd_evaluate(const std::string& in_path, const std::string& labels_path,
                 const RunConfig& config) {
  ReportClock clock;
  mixprod::CsvDataset csv = mixprod::read_csv(in_path);
  if (csv.truth.empty()) {
    throw Error(ErrorCode::invalid_argument,
                "evaluation needs a dataset with a truth column");
  }
  std::vector<int> labels = mixprod::read_labels_csv(labels_path);
  if (labels.size() != static_cast<std::size_t>(csv.data.rows())) {
    throw Error(ErrorCode::invalid_argument,
                "label file has " + std::to_string(labels.size()) +
                    " rows but the dataset has " +
                    std::to_string(csv.data.rows()));
  }
  int m = 0;
  for (int z : csv.truth) m = std::max(m, z);
  mixprod::BandwidthSet bandwidths =
      mixprod::select_bandwidths(csv.data, rule_of(config));
  mixprod::MmdReport scored =
      mixprod::match_and_score(labels, m, csv.truth, csv.data, bandwidths);

  ordered_json report;
  report["command"] = "evaluate";
  report["config"] = config_json(config);
  report["input"] = input_json(in_path, csv);
  report["results"] = {{"m", m},
                       {"labels_in", labels_path},
                       {"permutation", scored.permutation},
                       {"per_cluster_mmd2", scored.per_cluster_mmd2},
                       {"total", scored.total}};
  report["warnings"] = ordered_json::array();
  emit(report, clock);
  return 0;
}

int cmd_infer(const std::string& in_path, const RunConfig& config) {
  ReportClock clock;
  mixprod::CsvDataset csv = mixprod::read_csv(in_path);
  mixprod::CausalVerdict verdict = mixprod::infer_structure(
      csv.data, config.rank_threshold, config.alpha, config.num_permutations,
      config.seed, rule_of(config));

  ordered_json report;
  report["command"] = "infer";
  report["config"] = config_json(config);
  report["input"] = input_json(in_path, csv);
  ordered_json pairwise = ordered_json::array();
  for (Eigen::Index a = 0; a < verdict.pairwise_p.rows(); ++a) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index b = 0; b < verdict.pairwise_p.cols(); ++b) {
      row.push_back(verdict.pairwise_p(a, b));
    }
    pairwise.push_back(std::move(row));
  }
  ordered_json rank;
  if (verdict.rank.has_value()) {
    rank["majority"] = verdict.rank->majority;
    ordered_json partitions = ordered_json::array();
    for (const mixprod::PartitionRank& p : verdict.rank->per_partition) {
      ordered_json entry;
      entry["left"] = ordered_json::array();
      entry["right"] = ordered_json::array();
      for (int v : p.bipartition.left) entry["left"].push_back(v + 1);
      for (int v : p.bipartition.right) entry["right"].push_back(v + 1);
      entry["rank"] = p.rank;
      partitions.push_back(std::move(entry));
    }
    rank["partitions"] = std::move(partitions);
  } else {
    rank = nullptr;
  }
  report["results"] = {{"verdict", verdict_name(verdict.verdict)},
                       {"confounder_states", verdict.confounder_states},
                       {"threshold_used", verdict.threshold_used},
                       {"alpha", verdict.alpha},
                       {"pairwise_p", std::move(pairwise)},
                       {"rank", std::move(rank)},
                       {"caveats", verdict.caveats},
                       {"recommendation", verdict.recommendation}};
  report["warnings"] = ordered_json::array();
  warn_truth_ignored(report, csv);
  emit(report, clock);
  return 0;
}

void add_config_flags(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--seed", config.seed, "random seed");
  cmd->add_option("--alpha", config.alpha, "significance level in (0, 1)")
      ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
  cmd->add_option("--c", config.c, "points reassigned jointly per move")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", config.max_iterations,
                  "maximum clustering sweeps")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threshold", config.rank_threshold,
                  "rank below which a finite confounder is inferred")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--pvalue-method", config.pvalue_method,
                  "p-value method for the clustering objective")
      ->check(CLI::IsMember({"gamma", "permutation"}));
  cmd->add_option("--permutations", config.num_permutations,
                  "permutation count for p-values")
      ->check(CLI::Range(20, 1000000));
  cmd->add_option("--bandwidth", config.bandwidth_rule,
                  "bandwidth selection rule")
      ->check(CLI::IsMember({"median", "neighborhood"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixture-of-products analysis toolkit"};
  app.require_subcommand(1);

  RunConfig config;
  std::string protocol = "confounded";
  std::string in_path;
  std::string out_path;
  std::string labels_path;
  int d = 3;
  int m = 1;

  CLI::App* simulate =
      app.add_subcommand("simulate", "draw a synthetic dataset and write CSV");
  simulate->add_option("--protocol", protocol, "generation protocol")
      ->check(CLI::IsMember({"confounded", "direct_link"}));
  simulate->add_option("--d", d, "number of observed variables");
  simulate->add_option("--m", m, "components (confounded) or states (direct)")
      ->required();
  simulate->add_option("--out", out_path, "output CSV path")->required();
  add_config_flags(simulate, config);

  CLI::App* rank = app.add_subcommand(
      "rank", "estimate the number of mixture components from CSV data");
  rank->add_option("--in", in_path, "input CSV path")->required();
  add_config_flags(rank, config);

  CLI::App* cluster = app.add_subcommand(
      "cluster", "search for a relabeling with independent clusters");
  cluster->add_option("--in", in_path, "input CSV path")->required();
  cluster->add_option("--m", m, "number of clusters")->required();
  cluster->add_option("--out", out_path, "output labels CSV path")->required();
  add_config_flags(cluster, config);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "score labels against the truth column by squared MMD");
  evaluate->add_option("--in", in_path, "input CSV path with a truth column")
      ->required();
  evaluate->add_option("--labels", labels_path, "labels CSV path")->required();
  add_config_flags(evaluate, config);

  CLI::App* infer = app.add_subcommand(
      "infer", "issue a structural verdict for the dataset");
  infer->add_option("--in", in_path, "input CSV path")->required();
  add_config_flags(infer, config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems exit 2, --help exits 0
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (simulate->parsed()) {
      if (protocol == "direct_link" && simulate->count("--d") > 0 && d != 2) {
        throw Error(ErrorCode::invalid_config,
                    "the direct_link protocol is two-dimensional");
      }
      return cmd_simulate(protocol, d, m, out_path, config);
    }
    if (rank->parsed()) return cmd_rank(in_path, config);
    if (cluster->parsed()) return cmd_cluster(in_path, m, out_path, config);
    if (evaluate->parsed()) return cmd_evaluate(in_path, labels_path, config);
    return cmd_infer(in_path, config);
  } catch (const Error& e) {
    ordered_json report;
    report["command"] = command;
    report["error"] = {{"code", code_name(e.code())}, {"message", e.what()}};
    std::printf("%s\n", report.dump(2).c_str());
    return 2;
  } catch (const std::exception& e) {
    ordered_json report;
    report["command"] = command;
    report["error"] = {{"code", "internal"}, {"message", e.what()}};
    std::printf("%s\n", report.dump(2).c_str());
    return 2;
  }
}
