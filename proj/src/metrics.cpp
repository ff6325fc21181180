#include "hamnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hamnn/errors.hpp"

namespace hamnn {

namespace {

void check_lengths(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw shape_error("metrics: scores and labels length mismatch");
  for (int l : labels)
    if (l != 0 && l != 1) throw std::invalid_argument("metrics: labels must be 0 or 1");
}

std::pair<std::size_t, std::size_t> class_counts(const std::vector<int>& labels) {
  std::size_t pos = 0;
  for (int l : labels) pos += static_cast<std::size_t>(l);
  return {pos, labels.size() - pos};
}

}  // namespace

ConfusionMatrix confusion_at_threshold(const std::vector<double>& scores,
                                       const std::vector<int>& labels, double threshold) {
  check_lengths(scores, labels);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (predicted)
      labels[i] == 1 ? ++cm.tp : ++cm.fp;
    else
      labels[i] == 1 ? ++cm.fn : ++cm.tn;
  }
  return cm;
}

PrfResult precision_recall_f1(const ConfusionMatrix& cm) {
  PrfResult r;
  if (cm.tp + cm.fp > 0) {
    r.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  } else {
    r.degenerate_precision = true;
  }
  if (cm.tp + cm.fn > 0) {
    r.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  } else {
    r.degenerate_recall = true;
  }
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.degenerate_f1 = true;
  }
  return r;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_lengths(scores, labels);
  const auto [n_pos, n_neg] = class_counts(labels);
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_auc: need at least one positive and one negative label");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over tie groups; AUC from the positive-class rank sum.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += midrank;
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<std::pair<double, double>> roc_curve(const std::vector<double>& scores,
                                                 const std::vector<int>& labels) {
  check_lengths(scores, labels);
  const auto [n_pos, n_neg] = class_counts(labels);
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_curve: need at least one positive and one negative label");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<std::pair<double, double>> points;
  points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k)
      labels[order[k]] == 1 ? ++tp : ++fp;
    points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                        static_cast<double>(tp) / static_cast<double>(n_pos));
    i = j;
  }
  return points;
}

MetricsReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold) {
  const ConfusionMatrix cm = confusion_at_threshold(scores, labels, threshold);
  const PrfResult prf = precision_recall_f1(cm);
  MetricsReport r;
  r.accuracy = cm.total() > 0
                   ? static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total())
                   : 0.0;
  r.precision = prf.precision;
  r.recall = prf.recall;
  r.f1 = prf.f1;
  r.auc = roc_auc(scores, labels);
  r.degenerate = prf.degenerate_precision || prf.degenerate_recall || prf.degenerate_f1;
  return r;
}

FoldAggregate aggregate_folds(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate_folds: empty input");
  const double n = static_cast<double>(reports.size());

  auto agg = [&](auto metric) {
    MeanStd ms;
    for (const auto& r : reports) ms.mean += metric(r);
    ms.mean /= n;
    if (reports.size() > 1) {
      double acc = 0.0;
      for (const auto& r : reports) {
        const double dv = metric(r) - ms.mean;
        acc += dv * dv;
      }
      ms.stddev = std::sqrt(acc / (n - 1.0));
    }
    return ms;
  };

  FoldAggregate out;
  out.accuracy = agg([](const MetricsReport& r) { return r.accuracy; });
  out.precision = agg([](const MetricsReport& r) { return r.precision; });
  out.recall = agg([](const MetricsReport& r) { return r.recall; });
  out.f1 = agg([](const MetricsReport& r) { return r.f1; });
  out.auc = agg([](const MetricsReport& r) { return r.auc; });
  out.n_folds = reports.size();
  return out;
}

}  // namespace hamnn
