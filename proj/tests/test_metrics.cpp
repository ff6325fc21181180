#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "hamnn/errors.hpp"
#include "hamnn/metrics.hpp"
#include "hamnn/rng.hpp"

using namespace hamnn;

namespace {

// O(n^2) reference: concordant pairs plus half credit for ties.
double brute_force_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

std::pair<std::vector<double>, std::vector<int>> random_instance(RngStream& rng,
                                                                 std::size_t max_n = 200) {
  for (;;) {
    const std::size_t n = 2 + rng.next_below(max_n - 1);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    const bool coarse = rng.next_below(2) == 0;  // force ties half the time
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = coarse ? static_cast<double>(rng.next_below(5)) / 4.0 : rng.next_double();
      labels[i] = static_cast<int>(rng.next_below(2));
      (labels[i] == 1 ? has_pos : has_neg) = true;
    }
    if (has_pos && has_neg) return {scores, labels};
  }
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion matrix counting") {
  const ConfusionMatrix perfect =
      confusion_at_threshold({1.0, 0.0, 1.0, 0.0}, {1, 0, 1, 0}, 0.5);
  CHECK(perfect.fp == 0);
  CHECK(perfect.fn == 0);
  CHECK(perfect.tp == 2);
  CHECK(perfect.tn == 2);

  const ConfusionMatrix all_pos = confusion_at_threshold({0.2, 0.9, 0.4}, {0, 1, 1}, 0.0);
  CHECK(all_pos.tn == 0);
  CHECK(all_pos.fn == 0);
  CHECK(all_pos.tp + all_pos.fp == 3);

  const ConfusionMatrix mixed = confusion_at_threshold({0.6, 0.4}, {1, 1}, 0.5);
  CHECK(mixed.tp == 1);
  CHECK(mixed.fn == 1);
  CHECK(mixed.total() == 2);

  CHECK_THROWS_AS(confusion_at_threshold({0.5}, {1, 0}, 0.5), shape_error);
}

TEST_CASE("precision recall f1") {
  const PrfResult ones = precision_recall_f1({3, 0, 5, 0});
  CHECK(ones.precision == 1.0);
  CHECK(ones.recall == 1.0);
  CHECK(ones.f1 == 1.0);

  ConfusionMatrix empty_pred{};
  empty_pred.tn = 4;
  empty_pred.fn = 0;
  const PrfResult degenerate = precision_recall_f1(empty_pred);
  CHECK(degenerate.precision == 0.0);
  CHECK(degenerate.degenerate_precision);

  const PrfResult mixed = precision_recall_f1({3, 1, 0, 2});
  CHECK(mixed.precision == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(mixed.recall == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(mixed.f1 == doctest::Approx(2.0 * 0.75 * 0.6 / 1.35).epsilon(1e-12));
  CHECK(mixed.f1 == doctest::Approx(0.666667).epsilon(1e-5));
}

TEST_CASE("roc auc basics") {
  CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
  CHECK(roc_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(roc_auc({0.5, 0.6}, {1, 1}), std::invalid_argument);
}

TEST_CASE("rank statistic equals pairwise brute force") {
  RngStream rng(81);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [scores, labels] = random_instance(rng);
    CHECK(std::fabs(roc_auc(scores, labels) - brute_force_auc(scores, labels)) <= 1e-12);
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  RngStream rng(82);
  for (int trial = 0; trial < 20; ++trial) {
    const auto [scores, labels] = random_instance(rng, 100);
    std::vector<double> warped(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
      warped[i] = std::exp(3.0 * scores[i]) + std::atan(scores[i]);
    CHECK(roc_auc(scores, labels) == doctest::Approx(roc_auc(warped, labels)).epsilon(1e-12));
  }
}

TEST_CASE("roc curve starts at the origin, ends at (1,1), integrates to the auc") {
  RngStream rng(83);
  for (int trial = 0; trial < 30; ++trial) {
    const auto [scores, labels] = random_instance(rng, 50);
    const auto curve = roc_curve(scores, labels);
    CHECK(curve.front() == std::pair<double, double>{0.0, 0.0});
    CHECK(curve.back() == std::pair<double, double>{1.0, 1.0});
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
      area += 0.5 * (curve[i].second + curve[i - 1].second) * (curve[i].first - curve[i - 1].first);
    CHECK(std::fabs(area - roc_auc(scores, labels)) <= 1e-12);
  }
}

TEST_CASE("perfect scores pass through (0,1); reversing scores flips the area") {
  const std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  const auto curve = roc_curve(scores, labels);
  CHECK(std::count(curve.begin(), curve.end(), std::pair<double, double>{0.0, 1.0}) == 1);

  RngStream rng(84);
  const auto [s, l] = random_instance(rng, 60);
  std::vector<double> reversed(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) reversed[i] = -s[i];
  CHECK(roc_auc(reversed, l) == doctest::Approx(1.0 - roc_auc(s, l)).epsilon(1e-12));
}

TEST_CASE("evaluate_scores bundles the metric suite") {
  const MetricsReport r = evaluate_scores({0.9, 0.1, 0.8, 0.3}, {1, 0, 1, 0}, 0.5);
  CHECK(r.accuracy == 1.0);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  CHECK(r.auc == 1.0);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("accuracy on random balanced labels concentrates near one half") {
  RngStream rng(85);
  std::vector<double> scores(1000);
  std::vector<int> labels(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    scores[i] = rng.next_double();
    labels[i] = static_cast<int>(rng.next_below(2));
  }
  const MetricsReport r = evaluate_scores(scores, labels, 0.5);
  CHECK(r.accuracy > 0.4);
  CHECK(r.accuracy < 0.6);
}

TEST_CASE("fold aggregation") {
  MetricsReport a;
  a.accuracy = 0.8;
  a.precision = 0.7;
  a.recall = 0.6;
  a.f1 = 0.65;
  a.auc = 0.9;
  const FoldAggregate single = aggregate_folds({a});
  CHECK(single.accuracy.mean == 0.8);
  CHECK(single.accuracy.stddev == 0.0);
  CHECK(single.n_folds == 1);

  MetricsReport b = a;
  b.accuracy = 0.9;
  const FoldAggregate two = aggregate_folds({a, b});
  CHECK(two.accuracy.mean == doctest::Approx(0.85).epsilon(1e-15));
  CHECK(two.accuracy.stddev == doctest::Approx(0.070711).epsilon(1e-4));

  const FoldAggregate swapped = aggregate_folds({b, a});
  CHECK(swapped.accuracy.mean == two.accuracy.mean);
  CHECK(swapped.accuracy.stddev == two.accuracy.stddev);

  CHECK_THROWS_AS(aggregate_folds({}), std::invalid_argument);
}

}  // TEST_SUITE
