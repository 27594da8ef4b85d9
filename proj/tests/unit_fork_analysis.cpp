#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include "support/fixture_builders.hpp"
#include "support/oracles.hpp"
#include "waste_radar/errors.hpp"
#include "waste_radar/fork_analysis.hpp"

using namespace waste_radar;
using namespace waste_radar::testing;

namespace {

ForkRecord fork_with_gap_days(std::string full_name, Timestamp parent_pushed,
                              double gap_days) {
  const auto gap = std::chrono::seconds(
      static_cast<std::int64_t>(gap_days * kSecondsPerDay));
  ForkRecord fork;
  fork.full_name = std::move(full_name);
  fork.owner = fork.full_name.substr(0, fork.full_name.find('/'));
  fork.pushed_at = parent_pushed - gap;
  fork.created_at = fork.pushed_at - std::chrono::seconds(30 * kSecondsPerDay);
  return fork;
}

}  // namespace

TEST_CASE("is_backup uses a strict comparison") {
  auto fork = make_fork("a/w", "2024-01-10T00:00:00Z", "2024-01-09T23:59:59Z");
  CHECK(is_backup(fork));
  fork.pushed_at = fork.created_at;  // same instant: pushed, so not a backup
  CHECK(!is_backup(fork));
  fork.pushed_at = fork.created_at + std::chrono::seconds(1);
  CHECK(!is_backup(fork));
}

TEST_CASE("is_active window is strict at 90 days") {
  const auto parent = ts("2024-04-28T00:00:00Z");
  auto fork = make_fork("a/w", "2023-01-01T00:00:00Z", "2024-04-18T00:00:00Z");
  CHECK(is_active(fork, parent));  // 10 day gap

  fork.pushed_at = parent - std::chrono::seconds(90 * kSecondsPerDay);
  CHECK(!is_active(fork, parent));  // exactly 90 days is out
  fork.pushed_at = parent - std::chrono::seconds(90 * kSecondsPerDay - 1);
  CHECK(is_active(fork, parent));

  fork.pushed_at = parent + std::chrono::seconds(3 * kSecondsPerDay);
  CHECK(is_active(fork, parent));  // pushed after the parent

  fork.pushed_at = parent - std::chrono::seconds(30 * kSecondsPerDay);
  CHECK(!is_active(fork, parent, 7));  // narrower window
}

TEST_CASE("kmeans_two splits well separated values") {
  const double values[] = {1.0, 2.0, 100.0, 101.0};
  const auto result = kmeans_two(values);
  CHECK(result.assignments == std::vector<int>{0, 0, 1, 1});
  CHECK(result.centroids[0] == doctest::Approx(1.5));
  CHECK(result.centroids[1] == doctest::Approx(100.5));
  CHECK(result.converged);
}

TEST_CASE("kmeans_two is input-order independent") {
  const double values[] = {100.0, 1.0, 101.0, 2.0};
  const auto result = kmeans_two(values);
  CHECK(result.assignments == std::vector<int>{1, 0, 1, 0});
}

TEST_CASE("kmeans_two degenerate cases") {
  const double same[] = {5.0, 5.0, 5.0};
  const auto result = kmeans_two(same);
  CHECK(result.assignments == std::vector<int>{0, 0, 0});
  CHECK(result.centroids[0] == 5.0);
  CHECK(result.centroids[1] == 5.0);

  const double pair[] = {1.0, 9.0};
  const auto two = kmeans_two(pair);
  CHECK(two.assignments == std::vector<int>{0, 1});
  CHECK(two.centroids[0] == 1.0);
  CHECK(two.centroids[1] == 9.0);

  const std::vector<double> empty;
  CHECK_THROWS_AS(kmeans_two(empty), ValidationError);
  CHECK_THROWS_AS(kmeans_two(pair, 0.0), ValidationError);
  CHECK_THROWS_AS(kmeans_two(pair, 1e-6, 0), ValidationError);
}

TEST_CASE("kmeans_two matches the exhaustive split oracle") {
  std::mt19937 rng(20240430);
  std::uniform_int_distribution<int> size_dist(1, 300);
  std::uniform_real_distribution<double> value_dist(0.0, 1500.0);
  std::uniform_int_distribution<int> dup_dist(0, 3);

  for (int trial = 0; trial < 80; ++trial) {
    std::vector<double> values(static_cast<std::size_t>(size_dist(rng)));
    for (auto& v : values) v = value_dist(rng);
    // duplicated values exercise tie handling
    if (values.size() > 4) {
      for (int d = dup_dist(rng); d > 0; --d) values[d] = values[0];
    }
    const auto fast = kmeans_two(values);
    const auto brute = kmeans_two_brute(values);
    CAPTURE(trial);
    CHECK(fast.assignments == brute.assignments);
    CHECK(fast.centroids[0] == doctest::Approx(brute.centroids[0]).epsilon(1e-9));
    CHECK(fast.centroids[1] == doctest::Approx(brute.centroids[1]).epsilon(1e-9));
  }
}

TEST_CASE("classify_forks labels the canonical shapes") {
  auto snapshot = make_snapshot();
  const auto parent = snapshot.parent_pushed_at;
  snapshot.forks.push_back(
      make_fork("b/backup", "2024-01-10T00:00:00Z", "2024-01-09T00:00:00Z"));
  snapshot.forks.push_back(fork_with_gap_days("a/active", parent, 10));
  snapshot.forks.push_back(fork_with_gap_days("p/one", parent, 100));
  snapshot.forks.push_back(fork_with_gap_days("p/two", parent, 101));
  snapshot.forks.push_back(fork_with_gap_days("s/one", parent, 900));

  const auto result = classify_forks(snapshot);
  CHECK(result.per_fork.at("b/backup").cls == ForkClass::Backup);
  CHECK(result.per_fork.at("a/active").cls == ForkClass::Active);
  CHECK(result.per_fork.at("p/one").cls == ForkClass::PotentiallyStale);
  CHECK(result.per_fork.at("p/two").cls == ForkClass::PotentiallyStale);
  CHECK(result.per_fork.at("s/one").cls == ForkClass::Stale);
  CHECK(result.distribution.total == 5);
  CHECK(result.distribution.counts.at(ForkClass::PotentiallyStale) == 2);
  CHECK(result.distribution.counts.at(ForkClass::Stale) == 1);
}

TEST_CASE("classify_forks boundary behavior") {
  auto snapshot = make_snapshot();
  const auto parent = snapshot.parent_pushed_at;

  SUBCASE("pushed equal to created is not backup") {
    ForkRecord fork = fork_with_gap_days("e/qual", parent, 10);
    fork.created_at = fork.pushed_at;
    snapshot.forks.push_back(fork);
    const auto result = classify_forks(snapshot);
    CHECK(result.per_fork.at("e/qual").cls == ForkClass::Active);
  }
  SUBCASE("a 90 day gap is not active") {
    snapshot.forks.push_back(fork_with_gap_days("o/ut", parent, 90));
    snapshot.forks.push_back(fork_with_gap_days("f/ar", parent, 900));
    const auto result = classify_forks(snapshot);
    CHECK(result.per_fork.at("o/ut").cls == ForkClass::PotentiallyStale);
    CHECK(result.per_fork.at("f/ar").cls == ForkClass::Stale);
  }
  SUBCASE("a lone inactive fork stays potentially stale") {
    snapshot.forks.push_back(fork_with_gap_days("l/one", parent, 700));
    const auto result = classify_forks(snapshot);
    CHECK(result.per_fork.at("l/one").cls == ForkClass::PotentiallyStale);
    CHECK(result.distribution.counts.at(ForkClass::Stale) == 0);
  }
  SUBCASE("no forks at all") {
    const auto result = classify_forks(snapshot);
    CHECK(result.distribution.total == 0);
    CHECK(result.distribution.percentages.empty());
    CHECK(result.per_fork.empty());
  }
}

TEST_CASE("classification is a total partition") {
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> count_dist(0, 120);
  std::uniform_int_distribution<std::int64_t> gap_dist(-40 * kSecondsPerDay,
                                                       1200 * kSecondsPerDay);
  std::uniform_int_distribution<int> backup_dist(0, 4);

  for (int trial = 0; trial < 25; ++trial) {
    auto snapshot = make_snapshot();
    const int n = count_dist(rng);
    for (int i = 0; i < n; ++i) {
      ForkRecord fork;
      fork.full_name = "o" + std::to_string(i) + "/w";
      fork.owner = fork.full_name.substr(0, fork.full_name.find('/'));
      fork.pushed_at = snapshot.parent_pushed_at - std::chrono::seconds(gap_dist(rng));
      fork.created_at = backup_dist(rng) == 0
                            ? fork.pushed_at + std::chrono::seconds(3600)
                            : fork.pushed_at - std::chrono::seconds(3600);
      snapshot.forks.push_back(std::move(fork));
    }

    const auto result = classify_forks(snapshot);
    CHECK(result.per_fork.size() == snapshot.forks.size());
    std::int64_t sum = 0;
    for (const auto& [cls, count] : result.distribution.counts) {
      CHECK(count >= 0);
      sum += count;
    }
    CHECK(sum == result.distribution.total);
    CHECK(result.distribution.total == static_cast<std::int64_t>(n));
    for (const auto& fork : snapshot.forks) {
      REQUIRE(result.per_fork.count(fork.full_name) == 1);
      const auto& info = result.per_fork.at(fork.full_name);
      // backups and actives agree with the scalar predicates
      if (is_backup(fork)) {
        CHECK(info.cls == ForkClass::Backup);
      } else if (is_active(fork, snapshot.parent_pushed_at)) {
        CHECK(info.cls == ForkClass::Active);
      } else {
        CHECK((info.cls == ForkClass::PotentiallyStale ||
               info.cls == ForkClass::Stale));
      }
    }
    if (result.distribution.total > 0) {
      double pct_sum = 0;
      for (const auto& [cls, pct] : result.distribution.percentages) pct_sum += pct;
      CHECK(pct_sum == doctest::Approx(100.0));
    }
  }
}

TEST_CASE("stale cluster always has the larger gaps") {
  auto snapshot = make_snapshot();
  const auto parent = snapshot.parent_pushed_at;
  for (int i = 0; i < 40; ++i) {
    snapshot.forks.push_back(
        fork_with_gap_days("q" + std::to_string(i) + "/w", parent, 95 + 7 * i));
  }
  const auto result = classify_forks(snapshot);
  std::int64_t max_pot = -1;
  std::int64_t min_stale = std::numeric_limits<std::int64_t>::max();
  for (const auto& [name, info] : result.per_fork) {
    if (info.cls == ForkClass::PotentiallyStale) max_pot = std::max(max_pot, info.gap_seconds);
    if (info.cls == ForkClass::Stale) min_stale = std::min(min_stale, info.gap_seconds);
  }
  CHECK(max_pot < min_stale);
}

TEST_CASE("make_fork_distribution computes percentages") {
  const auto dist = make_fork_distribution(1653, 140646, 2440, 3157);
  CHECK(dist.total == 147896);
  CHECK(dist.percentages.at(ForkClass::Active) ==
        doctest::Approx(1.1176).epsilon(1e-4));
  CHECK(dist.percentages.at(ForkClass::Backup) ==
        doctest::Approx(95.0979).epsilon(1e-4));
  const auto empty = make_fork_distribution(0, 0, 0, 0);
  CHECK(empty.total == 0);
  CHECK(empty.percentages.empty());
  CHECK(empty.counts.size() == 4);
}

TEST_CASE("split_contribution links forks through pull heads") {
  auto snapshot = make_snapshot();
  const auto parent = snapshot.parent_pushed_at;
  snapshot.forks.push_back(fork_with_gap_days("amy/widget", parent, 1));
  snapshot.forks.push_back(fork_with_gap_days("bob/widget", parent, 2));
  snapshot.forks.push_back(fork_with_gap_days("cal/widget", parent, 3));
  snapshot.pulls.push_back(make_pull(1, "2024-01-01T00:00:00Z",
                                     std::string("2024-01-02T00:00:00Z"),
                                     std::nullopt, "someone",
                                     std::string("amy/widget")));
  // deleted head fork: attribution falls back to the author login
  snapshot.pulls.push_back(make_pull(2, "2024-01-03T00:00:00Z",
                                     std::string("2024-01-04T00:00:00Z"),
                                     std::nullopt, "bob", std::nullopt));

  const auto classification = classify_forks(snapshot);
  std::vector<ForkRecord> active;
  for (const auto& fork : snapshot.forks) {
    if (classification.per_fork.at(fork.full_name).cls == ForkClass::Active) {
      active.push_back(fork);
    }
  }
  REQUIRE(active.size() == 3);
  const auto report = split_contribution(snapshot, active);
  CHECK(report.contributing == 2);  // amy via head, bob via author fallback
  CHECK(report.independent == 1);   // cal
  REQUIRE(report.pdi().has_value());
  CHECK(*report.pdi() == doctest::Approx(2.0));
}

TEST_CASE("pdi is undefined without independent forks") {
  DiversificationReport report;
  report.contributing = 5;
  report.independent = 0;
  CHECK(!report.pdi().has_value());

  report.independent = 1605;
  report.contributing = 23;
  CHECK(*report.pdi() == doctest::Approx(23.0 / 1605.0));
}

TEST_CASE("zhou comparison rule needs both description and age") {
  auto snapshot = make_snapshot();
  auto old_fork = make_fork("a/widget", "2020-01-01T00:00:00Z",
                            "2022-01-01T00:00:00Z", "Fork of acme/widget");
  auto young_fork = make_fork("b/widget", "2024-01-01T00:00:00Z",
                              "2024-02-01T00:00:00Z", "fork of acme/widget");
  auto plain_fork = make_fork("c/widget", "2020-01-01T00:00:00Z",
                              "2022-01-01T00:00:00Z", "my own thing");
  snapshot.forks = {plain_fork, old_fork, young_fork};

  const auto names = zhou_independent_forks(snapshot);
  CHECK(names == std::vector<std::string>{"a/widget"});
}

TEST_CASE("fork classes csv lists forks sorted with day gaps") {
  auto snapshot = make_snapshot();
  const auto parent = snapshot.parent_pushed_at;
  snapshot.forks.push_back(fork_with_gap_days("z/w", parent, 10));
  snapshot.forks.push_back(
      make_fork("a/w", "2024-01-10T00:00:00Z", "2024-01-09T00:00:00Z"));

  const auto csv = fork_classes_csv(classify_forks(snapshot));
  CHECK(csv.find("full_name,class,gap_days") == 0);
  const auto a_pos = csv.find("a/w,backup,");
  const auto z_pos = csv.find("z/w,active,10.0000");
  REQUIRE(a_pos != std::string::npos);
  REQUIRE(z_pos != std::string::npos);
  CHECK(a_pos < z_pos);
}
