#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "mixprod/clic.hpp"
#include "mixprod/evaluate.hpp"
#include "oracles.hpp"

using namespace mixprod;

namespace {

Eigen::MatrixXd gaussian_matrix(std::uint64_t seed, int n, int d) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd data(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) data(i, j) = gauss(rng);
  return data;
}

// two clearly separated product components, n/2 points each
Eigen::MatrixXd separated_pair(std::uint64_t seed, int n,
                               std::vector<int>* truth) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd data(n, 2);
  truth->resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int z = i % 2;
    (*truth)[static_cast<std::size_t>(i)] = z + 1;
    for (int j = 0; j < 2; ++j) data(i, j) = 8.0 * z + gauss(rng);
  }
  return data;
}

BandwidthSet unit_bandwidths(int d) {
  BandwidthSet bw;
  bw.per_variable.assign(static_cast<std::size_t>(d), 1.0);
  return bw;
}

Eigen::MatrixXd rows_with_label(const Eigen::MatrixXd& data,
                                const std::vector<int>& labels, int which) {
  std::vector<int> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == which) rows.push_back(static_cast<int>(i));
  }
  Eigen::MatrixXd block(static_cast<Eigen::Index>(rows.size()), data.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    block.row(static_cast<Eigen::Index>(r)) = data.row(rows[r]);
  }
  return block;
}

}  // namespace

TEST_CASE("the squared discrepancy matches a double-loop evaluation") {
  std::mt19937_64 rng(301);
  std::uniform_int_distribution<int> size(1, 12);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> width(0.4, 2.5);
  for (int rep = 0; rep < 25; ++rep) {
    int d = dim(rng);
    Eigen::MatrixXd a(size(rng), d);
    Eigen::MatrixXd b(size(rng), d);
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < d; ++j) a(i, j) = coord(rng);
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < d; ++j) b(i, j) = coord(rng);
    BandwidthSet bw;
    for (int j = 0; j < d; ++j) bw.per_variable.push_back(width(rng));
    double got = mmd_squared(a, b, bw);
    double want = oracle::mmd2_loop(a, b, bw.per_variable);
    CHECK(std::abs(got - std::max(0.0, want)) <= 1e-12);
  }
}

TEST_CASE("identical samples have zero discrepancy") {
  Eigen::MatrixXd a = gaussian_matrix(302, 40, 3);
  CHECK(mmd_squared(a, a, unit_bandwidths(3)) == 0.0);
}

TEST_CASE("a larger mean shift gives a larger discrepancy on matched draws") {
  for (std::uint64_t seed = 310; seed < 320; ++seed) {
    Eigen::MatrixXd base = gaussian_matrix(seed, 60, 1);
    Eigen::MatrixXd far = base.array() + 5.0;
    Eigen::MatrixXd near = base.array() + 0.1;
    BandwidthSet bw = unit_bandwidths(1);
    CHECK(mmd_squared(base, far, bw) > mmd_squared(base, near, bw));
  }
}

TEST_CASE("the discrepancy is symmetric and nonnegative") {
  Eigen::MatrixXd a = gaussian_matrix(303, 25, 2);
  Eigen::MatrixXd b = gaussian_matrix(304, 31, 2).array() + 0.5;
  BandwidthSet bw = unit_bandwidths(2);
  double ab = mmd_squared(a, b, bw);
  double ba = mmd_squared(b, a, bw);
  CHECK(ab >= 0.0);
  CHECK(ab == doctest::Approx(ba).epsilon(1e-13));
}

TEST_CASE("discrepancy inputs are validated") {
  Eigen::MatrixXd a = gaussian_matrix(305, 10, 2);
  Eigen::MatrixXd empty(0, 2);
  try {
    mmd_squared(a, empty, unit_bandwidths(2));
    FAIL("expected empty_cluster");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_cluster);
  }
  try {
    mmd_squared(a, gaussian_matrix(306, 10, 3), unit_bandwidths(2));
    FAIL("expected invalid_argument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }
  try {
    mmd_squared(a, a, unit_bandwidths(3));
    FAIL("expected invalid_argument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }
  BandwidthSet bad = unit_bandwidths(2);
  bad.per_variable[1] = 0.0;
  try {
    mmd_squared(a, a, bad);
    FAIL("expected invalid_bandwidth");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_bandwidth);
  }
}

TEST_CASE("a pure label swap is matched back with zero total") {
  std::vector<int> truth;
  Eigen::MatrixXd data = separated_pair(321, 80, &truth);
  std::vector<int> swapped(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) swapped[i] = 3 - truth[i];
  MmdReport report =
      match_and_score(swapped, 2, truth, data, unit_bandwidths(2));
  CHECK(report.permutation == std::vector<int>{2, 1});
  CHECK(report.total <= 1e-12);
  CHECK(report.total ==
        report.per_cluster_mmd2[0] + report.per_cluster_mmd2[1]);
}

TEST_CASE("matching beats the wrong bijection on a noisy swap") {
  std::vector<int> truth;
  Eigen::MatrixXd data = separated_pair(322, 100, &truth);
  std::mt19937_64 rng(323);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> noisy(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    noisy[i] = 3 - truth[i];                       // swap...
    if (unit(rng) < 0.10) noisy[i] = 3 - noisy[i]; // ...with 10% flips
  }
  BandwidthSet bw = unit_bandwidths(2);
  MmdReport report = match_and_score(noisy, 2, truth, data, bw);
  CHECK(report.permutation == std::vector<int>{2, 1});
  double identity_total =
      mmd_squared(rows_with_label(data, noisy, 1),
                  rows_with_label(data, truth, 1), bw) +
      mmd_squared(rows_with_label(data, noisy, 2),
                  rows_with_label(data, truth, 2), bw);
  CHECK(report.total < identity_total);
}

TEST_CASE("the truth labels score better than random labels") {
  std::mt19937_64 rng(324);
  std::uniform_int_distribution<int> pick(1, 2);
  for (std::uint64_t seed = 330; seed < 350; ++seed) {
    std::vector<int> truth;
    Eigen::MatrixXd data = separated_pair(seed, 100, &truth);
    std::vector<int> random_labels(truth.size());
    for (int& z : random_labels) z = pick(rng);
    bool feasible = false;  // both clusters populated
    for (std::size_t i = 1; i < random_labels.size(); ++i) {
      feasible = feasible || random_labels[i] != random_labels[0];
    }
    REQUIRE(feasible);
    BandwidthSet bw = select_bandwidths(data, BandwidthRule::neighborhood);
    MmdReport good = match_and_score(truth, 2, truth, data, bw);
    MmdReport bad = match_and_score(random_labels, 2, truth, data, bw);
    CHECK(good.total < bad.total);
  }
}

TEST_CASE("a recovered clustering scores close to the truth") {
  std::mt19937_64 rng(325);
  std::uniform_int_distribution<int> pick(1, 2);
  for (std::uint64_t seed : {72ULL, 76ULL, 80ULL}) {
    std::vector<int> truth;
    Eigen::MatrixXd data = separated_pair(seed, 120, &truth);
    ClicConfig config;
    config.m = 2;
    config.seed = seed;
    ClicResult r = clic(data, config);
    REQUIRE(r.status == ClicStatus::converged_independent);
    std::vector<int> random_labels(truth.size());
    for (int& z : random_labels) z = pick(rng);
    BandwidthSet bw = select_bandwidths(data, BandwidthRule::neighborhood);
    MmdReport recovered = match_and_score(r.labels, 2, truth, data, bw);
    MmdReport random_score =
        match_and_score(random_labels, 2, truth, data, bw);
    CHECK(recovered.total < random_score.total);
  }
}

TEST_CASE("totals are invariant under relabeling either side") {
  std::vector<int> truth;
  Eigen::MatrixXd data = separated_pair(326, 60, &truth);
  std::mt19937_64 rng(327);
  std::uniform_int_distribution<int> pick(1, 2);
  std::vector<int> output(truth.size());
  for (int& z : output) z = pick(rng);

  BandwidthSet bw = unit_bandwidths(2);
  MmdReport base = match_and_score(output, 2, truth, data, bw);

  std::vector<int> output_swapped(output.size());
  std::vector<int> truth_swapped(truth.size());
  for (std::size_t i = 0; i < output.size(); ++i) {
    output_swapped[i] = 3 - output[i];
    truth_swapped[i] = 3 - truth[i];
  }
  CHECK(match_and_score(output_swapped, 2, truth, data, bw).total ==
        base.total);
  CHECK(match_and_score(output, 2, truth_swapped, data, bw).total ==
        base.total);
}

TEST_CASE("the chosen bijection never loses to the identity") {
  std::mt19937_64 rng(328);
  std::uniform_int_distribution<int> pick(1, 3);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd data = gaussian_matrix(400 + static_cast<std::uint64_t>(rep), 60, 2);
    std::vector<int> truth(60), output(60);
    for (int i = 0; i < 60; ++i) {
      truth[static_cast<std::size_t>(i)] = i % 3 + 1;
      output[static_cast<std::size_t>(i)] = pick(rng);
    }
    BandwidthSet bw = unit_bandwidths(2);
    MmdReport report = match_and_score(output, 3, truth, data, bw);
    double identity_total = 0.0;
    for (int k = 1; k <= 3; ++k) {
      Eigen::MatrixXd out = rows_with_label(data, output, k);
      identity_total += out.rows() == 0
                            ? kEmptyClusterMmd2
                            : mmd_squared(out, rows_with_label(data, truth, k),
                                          bw);
    }
    CHECK(report.total <= identity_total);
  }
}

TEST_CASE("an empty output cluster scores the sentinel but still matches") {
  std::vector<int> truth;
  Eigen::MatrixXd data = separated_pair(329, 40, &truth);
  std::vector<int> collapsed(truth.size(), 1);  // cluster 2 never used
  MmdReport report =
      match_and_score(collapsed, 2, truth, data, unit_bandwidths(2));
  CHECK(report.per_cluster_mmd2[1] == kEmptyClusterMmd2);
  CHECK(report.per_cluster_mmd2[0] < kEmptyClusterMmd2);
  std::vector<int> sorted = report.permutation;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{1, 2});
}

TEST_CASE("matching validates its configuration") {
  std::vector<int> truth;
  Eigen::MatrixXd data = separated_pair(331, 40, &truth);
  std::vector<int> output(truth.size(), 1);
  try {
    match_and_score(output, 1, truth, data, unit_bandwidths(2));
    FAIL("expected invalid_config");  // truth has two distinct labels
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_config);
  }

  Eigen::MatrixXd wide(18, 2);
  wide.setZero();
  std::vector<int> nine(18);
  for (int i = 0; i < 18; ++i) nine[static_cast<std::size_t>(i)] = i % 9 + 1;
  try {
    match_and_score(nine, 9, nine, wide, unit_bandwidths(2));
    FAIL("expected invalid_config");  // 9! bijections is past the guard
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_config);
  }
}
