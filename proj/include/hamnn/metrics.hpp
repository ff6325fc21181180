#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace hamnn {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

// Predict 1 iff score >= threshold.
ConfusionMatrix confusion_at_threshold(const std::vector<double>& scores,
                                       const std::vector<int>& labels, double threshold);

// Zero-denominator cases return 0 and set the matching flag so averages are
// never poisoned by NaN.
struct PrfResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate_precision = false;
  bool degenerate_recall = false;
  bool degenerate_f1 = false;
};

PrfResult precision_recall_f1(const ConfusionMatrix& cm);

// Mann-Whitney rank statistic with midrank tie handling, O(n log n).
// Throws std::invalid_argument when labels contain a single class.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// (fpr, tpr) points at every distinct threshold, from (0,0) to (1,1).
// Trapezoidal area equals roc_auc.
std::vector<std::pair<double, double>> roc_curve(const std::vector<double>& scores,
                                                 const std::vector<int>& labels);

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  bool degenerate = false;  // any thresholded metric hit a zero denominator
};

// All five metrics at one threshold.
MetricsReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold = 0.5);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1) standard deviation; 0 when n == 1
};

struct FoldAggregate {
  MeanStd accuracy, precision, recall, f1, auc;
  std::size_t n_folds = 0;
};

// Throws std::invalid_argument on empty input.
FoldAggregate aggregate_folds(const std::vector<MetricsReport>& reports);

}  // namespace hamnn
