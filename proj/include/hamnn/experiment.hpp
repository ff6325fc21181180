#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hamnn/dataset.hpp"
#include "hamnn/loss.hpp"
#include "hamnn/metrics.hpp"
#include "hamnn/mlp.hpp"
#include "hamnn/optimizer.hpp"

#include "json.hpp"

namespace hamnn {

// Exactly one of the two sources is set.
struct DataSourceConfig {
  std::optional<std::string> csv_path;
  std::optional<DriftGenConfig> generator;
};

struct SplitConfig {
  long long val_cut = 0;
  long long oot_cut = 0;
};

struct SmoteSection {
  bool enabled = true;
  std::size_t k_neighbors = 5;
  double target_ratio = 1.0;
  bool standardize = true;
};

struct ModelConfig {
  std::vector<std::size_t> hidden_dims{128, 64};
  double dropout_rate = 0.2;
  Activation activation = Activation::LeakyRelu;
  double leaky_slope = 0.01;
};

enum class OptimizerKind { Symplectic, SgdMomentum };

struct TrainingConfig {
  std::size_t max_epochs = 100;
  std::size_t batch_size = 256;
  std::size_t patience = 10;
  std::uint64_t seed = 42;
};

// Grid axes; an empty axis keeps the base config's value for that dimension.
struct GridAxes {
  std::vector<double> eta;
  std::vector<double> lambda;
  std::vector<double> beta;
  std::vector<std::vector<std::size_t>> hidden_dims;

  bool empty() const {
    return eta.empty() && lambda.empty() && beta.empty() && hidden_dims.empty();
  }
};

struct ExperimentConfig {
  DataSourceConfig data;
  SplitConfig split;
  SmoteSection smote;
  ModelConfig model;
  LossConfig loss;
  OptimizerKind optimizer_kind = OptimizerKind::Symplectic;
  OptimConfig optim;
  TrainingConfig training;
  std::size_t cv_k = 5;
  GridAxes grid;
};

// Strict parser: unknown keys are errors naming the key, and validation
// reports every violation at once. Throws config_error.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

struct TrainingCurves {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;  // 1-based epoch whose checkpoint was restored
  std::size_t epochs_run = 0;
};

struct TrainResult {
  MlpParams params;
  TrainingCurves curves;
  std::vector<EnergyRecord> energy_trace;  // empty for the sgd baseline
};

// Mini-batch training with per-epoch validation loss, early stopping after
// `patience` non-improving epochs, and best-checkpoint restore. The stream is
// forked internally for init, shuffling and dropout, so two runs with the
// same stream are identical.
TrainResult run_training(const ExperimentConfig& cfg, const Dataset& train, const Dataset& val,
                         RngStream rng);

// Collects the original row ids that reach leakage-sensitive stages.
struct PipelineAudit {
  std::set<long long> smote_input_ids;
  std::set<long long> training_ids;  // rows seen by run_training (train or val)
  std::set<long long> grid_ids;
};

struct GridCell {
  double eta = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
  std::vector<std::size_t> hidden_dims;
  double mean_val_auc = 0.0;
  std::vector<double> fold_aucs;
};

struct GridSearchResult {
  GridCell best;
  std::vector<GridCell> table;
};

// Cartesian product of the axes, each cell scored by mean validation AUC over
// the K-1 temporal folds; ties broken by lower lambda, then lower eta, then
// smaller architecture.
GridSearchResult grid_search(const ExperimentConfig& cfg, const Dataset& train_partition,
                             PipelineAudit* audit = nullptr);

struct RunReport {
  nlohmann::ordered_json config;  // snapshot; round-trips through parse_config_json
  std::vector<MetricsReport> folds;
  std::optional<FoldAggregate> aggregate;
  MetricsReport validation;
  MetricsReport oot;
  TrainingCurves curves;
  std::vector<EnergyRecord> energy_trace;
  std::string energy_trace_path;
  std::optional<GridSearchResult> grid;
  MlpParams final_params;  // parameters of the final fit, for snapshot export
  bool external = false;
  double wall_clock_seconds = 0.0;
};

// Full protocol: load/generate -> temporal split -> grid or fixed params ->
// time-based CV on train (SMOTE inside each training portion) -> final fit on
// the oversampled train partition -> evaluate on validation and OOT.
RunReport run_benchmark(const ExperimentConfig& cfg, PipelineAudit* audit = nullptr);

// Single run without cross-validation (the `train` subcommand).
RunReport run_single(const ExperimentConfig& cfg, PipelineAudit* audit = nullptr);

// Scores an externally produced prediction file against a label file, both
// CSV with headers "id,score" / "id,label", aligned by id.
RunReport score_external(const std::string& predictions_csv, const std::string& labels_csv);

nlohmann::ordered_json report_to_json(const RunReport& report);
void export_report_json(const RunReport& report, const std::string& path);
// One row per fold, then mean/std aggregate rows, then validation and oot
// rows when present; foldless reports emit only their terminal rows.
void export_summary_csv(const RunReport& report, const std::string& path);

}  // namespace hamnn
