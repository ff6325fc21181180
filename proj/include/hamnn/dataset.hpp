#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hamnn/tensor.hpp"

namespace hamnn {

// Feature matrix with binary labels (1 = default) and a per-row origination
// period. row_ids track provenance through subsetting; synthetic rows carry -1.
struct Dataset {
  Tensor features;  // n x d
  std::vector<int> labels;
  std::vector<long long> time_index;
  std::vector<std::string> feature_names;
  std::vector<long long> row_ids;

  std::size_t n_rows() const { return labels.size(); }
  std::size_t n_features() const { return feature_names.size(); }
  Dataset subset(const std::vector<std::size_t>& idx) const;
  void validate() const;  // field length consistency, binary labels
};

// Column layout of the on-disk CSV. An empty feature list means "every column
// that is not the label or time column, in file order".
struct CsvSchema {
  std::vector<std::string> feature_columns;
  std::string label_column = "default_flag";
  std::string time_column = "orig_period";
};

// Strict reader: missing columns, unparsable or missing cells, labels outside
// {0,1} and empty files all throw io_error. No imputation.
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});

// Writes the same schema; numeric cells use round-trippable formatting.
void write_csv(const Dataset& ds, const std::string& path);

// Non-overlapping time partitions: train < val_cut <= validation < oot_cut <= oot.
struct TemporalSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> oot;
  long long val_cut = 0;
  long long oot_cut = 0;
};

// Throws std::invalid_argument when cuts are misordered or any partition ends
// up empty.
TemporalSplit temporal_split(const Dataset& ds, long long val_cut, long long oot_cut);

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  double target_ratio = 1.0;  // minority/majority after oversampling, in (0, 1]
  std::uint64_t seed = 0;
  bool standardize = true;  // standardize features for the neighbor distances

  void validate() const;
};

// Which original rows a synthetic row interpolates, and the draw used.
struct SmoteProvenance {
  std::size_t donor = 0;     // row index into the input dataset
  std::size_t neighbor = 0;  // row index into the input dataset
  double u = 0.0;            // in [0, 1)
};

// Appends synthetic minority rows x = donor + u * (neighbor - donor), the
// neighbor drawn among the donor's k nearest minority rows (Euclidean).
// Synthetic rows get label 1 and the donor's time_index. Apply to training
// partitions only; the pipeline enforces that, not this function.
Dataset smote_oversample(const Dataset& train, const SmoteConfig& cfg,
                         std::vector<SmoteProvenance>* provenance = nullptr);

// Time-ordered contiguous folds; pair k trains on folds 1..k and validates on
// fold k+1, so K folds give K-1 pairs.
std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> time_based_folds(
    const Dataset& ds, std::size_t k);

struct DriftGenConfig {
  std::size_t n_rows = 4000;
  std::size_t n_features = 8;
  double base_default_rate = 0.2;  // in (0, 1)
  double drift_magnitude = 0.0;    // >= 0
  std::size_t n_periods = 10;
  int horizon_months = 12;  // one of 12, 36, 60
  std::uint64_t seed = 1;

  void validate() const;
};

// Synthetic drifting credit data: standard-normal features, labels drawn from
// a logistic model whose coefficient vector rotates per period at a rate
// proportional to drift_magnitude and horizon_months. The intercept is tuned
// by bisection so each period's expected default rate matches
// base_default_rate.
Dataset synthesize_credit_data(const DriftGenConfig& cfg);

}  // namespace hamnn
