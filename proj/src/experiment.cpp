#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "hamnn/errors.hpp"
#include "hamnn/experiment.hpp"

namespace hamnn {

namespace {

// Fork indices of the master stream; one purpose per index so every job gets
// an independent stream keyed by (seed, purpose, cell, fold).
enum StreamPurpose : std::uint64_t {
  kFinalFit = 1,
  kCvFold = 2,
  kFinalSmote = 3,
  kCvSmote = 4,
  kGridFold = 5,
  kGridSmote = 6,
};

Tensor labels_tensor(const Dataset& ds) {
  Tensor y({ds.n_rows()});
  for (std::size_t i = 0; i < ds.n_rows(); ++i) y[i] = static_cast<double>(ds.labels[i]);
  return y;
}

std::vector<double> score_dataset(const MlpParams& params, const Dataset& ds) {
  const auto [probs, cache] = forward(params, ds.features, ForwardMode::Eval);
  std::vector<double> scores(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) scores[i] = probs[i];
  return scores;
}

MetricsReport evaluate_dataset(const MlpParams& params, const Dataset& ds) {
  return evaluate_scores(score_dataset(params, ds), ds.labels, 0.5);
}

void audit_ids(std::set<long long>* target, const Dataset& ds) {
  if (!target) return;
  for (long long id : ds.row_ids)
    if (id >= 0) target->insert(id);
}

Dataset maybe_smote(const Dataset& train, const ExperimentConfig& cfg, std::uint64_t seed,
                    PipelineAudit* audit) {
  if (!cfg.smote.enabled) return train;
  if (audit) audit_ids(&audit->smote_input_ids, train);
  SmoteConfig sc;
  sc.k_neighbors = cfg.smote.k_neighbors;
  sc.target_ratio = cfg.smote.target_ratio;
  sc.standardize = cfg.smote.standardize;
  sc.seed = seed;
  return smote_oversample(train, sc);
}

Dataset obtain_dataset(const ExperimentConfig& cfg) {
  if (cfg.data.csv_path) return load_csv(*cfg.data.csv_path);
  if (cfg.data.generator) return synthesize_credit_data(*cfg.data.generator);
  throw config_error("config has no data source");
}

std::size_t architecture_size(std::size_t input_dim, const std::vector<std::size_t>& hidden) {
  std::size_t n = 0, fan_in = input_dim;
  std::vector<std::size_t> dims = hidden;
  dims.push_back(1);
  for (std::size_t out : dims) {
    n += out * fan_in + out;
    fan_in = out;
  }
  return n;
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},             {"auc", m.auc},             {"degenerate", m.degenerate}};
}

nlohmann::ordered_json aggregate_to_json(const FoldAggregate& a) {
  auto ms = [](const MeanStd& m) {
    return nlohmann::ordered_json{{"mean", m.mean}, {"std", m.stddev}};
  };
  return {{"n_folds", a.n_folds}, {"accuracy", ms(a.accuracy)}, {"precision", ms(a.precision)},
          {"recall", ms(a.recall)}, {"f1", ms(a.f1)},           {"auc", ms(a.auc)}};
}

nlohmann::ordered_json grid_cell_to_json(const GridCell& c) {
  return {{"eta", c.eta},
          {"lambda", c.lambda},
          {"beta", c.beta},
          {"hidden_dims", c.hidden_dims},
          {"mean_val_auc", c.mean_val_auc},
          {"fold_aucs", c.fold_aucs}};
}

void write_summary_row(std::ofstream& out, const std::string& name, const MetricsReport& m) {
  char buf[40];
  out << name;
  for (double v : {m.accuracy, m.precision, m.recall, m.f1, m.auc}) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out << "," << buf;
  }
  out << "\n";
}

}  // namespace

TrainResult run_training(const ExperimentConfig& cfg, const Dataset& train, const Dataset& val,
                         RngStream rng) {
  train.validate();
  val.validate();
  if (train.n_rows() == 0 || val.n_rows() == 0)
    throw std::invalid_argument("run_training: empty dataset");
  if (train.n_features() != val.n_features())
    throw shape_error("run_training: train/validation feature width mismatch");
  cfg.optim.validate();
  cfg.loss.validate();

  LayerSpec spec;
  spec.input_dim = train.n_features();
  spec.hidden_dims = cfg.model.hidden_dims;
  spec.dropout_rate = cfg.model.dropout_rate;
  spec.activation = cfg.model.activation;
  spec.leaky_slope = cfg.model.leaky_slope;

  RngStream init_rng = rng.fork(0);
  RngStream shuffle_rng = rng.fork(1);
  RngStream dropout_rng = rng.fork(2);

  MlpParams params = init_params(spec, init_rng);
  ParamState state = init_state(params);
  const Tensor val_y = labels_tensor(val);

  TrainResult result;
  MlpParams best_params = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs = 0;
  std::size_t step_counter = 0;
  const std::size_t n = train.n_rows();
  const std::size_t batch = std::min(cfg.training.batch_size, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.training.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      Tensor xb({len, train.n_features()});
      Tensor yb({len});
      for (std::size_t r = 0; r < len; ++r) {
        const std::size_t src = order[start + r];
        for (std::size_t c = 0; c < train.n_features(); ++c)
          xb.at(r, c) = train.features.at(src, c);
        yb[r] = static_cast<double>(train.labels[src]);
      }

      auto [probs, cache] = forward(params, xb, ForwardMode::Train, &dropout_rng);
      const LossBreakdown lb = hamiltonian_loss(probs, yb, params, cfg.loss);
      if (!std::isfinite(lb.total)) {
        std::ostringstream os;
        os << "non-finite training loss (base=" << lb.base << ", reg=" << lb.reg << ") at epoch "
           << epoch << ", batch row " << start;
        throw std::runtime_error(os.str());
      }
      ParamGrads grads = backward(params, cache, bce_grad(probs, yb));
      add_regularizer_grad(params, cfg.loss, grads);

      if (cfg.optimizer_kind == OptimizerKind::Symplectic) {
        ++step_counter;
        const std::vector<EnergyTriple> energies = step(params, grads, state, cfg.optim);
        for (std::size_t i = 0; i < energies.size(); ++i)
          result.energy_trace.push_back({step_counter, params.tensor_name(i),
                                         energies[i].kinetic, energies[i].potential,
                                         energies[i].hamiltonian});
      } else {
        sgd_momentum_step(params, grads, state, cfg.optim.eta, cfg.optim.beta);
      }
      epoch_loss += lb.total * static_cast<double>(len);
    }
    result.curves.train_loss.push_back(epoch_loss / static_cast<double>(n));

    const auto [val_probs, val_cache] = forward(params, val.features, ForwardMode::Eval);
    const double val_loss = hamiltonian_loss(val_probs, val_y, params, cfg.loss).total;
    result.curves.val_loss.push_back(val_loss);

    if (val_loss < best_val) {
      best_val = val_loss;
      best_params = params;
      result.curves.best_epoch = epoch;
      bad_epochs = 0;
    } else if (++bad_epochs > cfg.training.patience) {
      break;
    }
  }

  result.curves.epochs_run = result.curves.val_loss.size();
  result.params = std::move(best_params);  // checkpoint restore
  return result;
}

GridSearchResult grid_search(const ExperimentConfig& cfg, const Dataset& train_partition,
                             PipelineAudit* audit) {
  const auto folds = time_based_folds(train_partition, cfg.cv_k);
  const RngStream master(cfg.training.seed);

  const std::vector<double> etas = cfg.grid.eta.empty() ? std::vector<double>{cfg.optim.eta}
                                                        : cfg.grid.eta;
  const std::vector<double> lambdas =
      cfg.grid.lambda.empty() ? std::vector<double>{cfg.loss.lambda} : cfg.grid.lambda;
  const std::vector<double> betas = cfg.grid.beta.empty() ? std::vector<double>{cfg.optim.beta}
                                                          : cfg.grid.beta;
  const std::vector<std::vector<std::size_t>> archs =
      cfg.grid.hidden_dims.empty() ? std::vector<std::vector<std::size_t>>{cfg.model.hidden_dims}
                                   : cfg.grid.hidden_dims;
  if (etas.empty() || lambdas.empty() || betas.empty() || archs.empty())
    throw std::invalid_argument("grid_search: empty grid");

  GridSearchResult result;
  std::size_t cell_index = 0;
  for (double eta : etas) {
    for (double lambda : lambdas) {
      for (double beta : betas) {
        for (const auto& hidden : archs) {
          ExperimentConfig cell_cfg = cfg;
          cell_cfg.optim.eta = eta;
          cell_cfg.optim.beta = beta;
          cell_cfg.loss.lambda = lambda;
          cell_cfg.model.hidden_dims = hidden;

          GridCell cell;
          cell.eta = eta;
          cell.lambda = lambda;
          cell.beta = beta;
          cell.hidden_dims = hidden;

          for (std::size_t k = 0; k < folds.size(); ++k) {
            const Dataset fold_train = train_partition.subset(folds[k].first);
            const Dataset fold_val = train_partition.subset(folds[k].second);
            if (audit) {
              audit_ids(&audit->grid_ids, fold_train);
              audit_ids(&audit->grid_ids, fold_val);
            }
            const Dataset fold_train_sm = maybe_smote(
                fold_train, cell_cfg, master.fork(kGridSmote).fork(cell_index).fork(k).seed(),
                audit);
            if (audit) {
              audit_ids(&audit->training_ids, fold_train_sm);
              audit_ids(&audit->training_ids, fold_val);
            }
            const TrainResult tr = run_training(cell_cfg, fold_train_sm, fold_val,
                                                master.fork(kGridFold).fork(cell_index).fork(k));
            cell.fold_aucs.push_back(evaluate_dataset(tr.params, fold_val).auc);
          }
          cell.mean_val_auc =
              std::accumulate(cell.fold_aucs.begin(), cell.fold_aucs.end(), 0.0) /
              static_cast<double>(cell.fold_aucs.size());
          result.table.push_back(std::move(cell));
          ++cell_index;
        }
      }
    }
  }

  // Max mean AUC; ties prefer lower lambda, then lower eta, then the smaller
  // architecture, then lower beta.
  const std::size_t input_dim = train_partition.n_features();
  auto better = [&](const GridCell& a, const GridCell& b) {
    if (a.mean_val_auc != b.mean_val_auc) return a.mean_val_auc > b.mean_val_auc;
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.eta != b.eta) return a.eta < b.eta;
    const std::size_t sa = architecture_size(input_dim, a.hidden_dims);
    const std::size_t sb = architecture_size(input_dim, b.hidden_dims);
    if (sa != sb) return sa < sb;
    if (a.hidden_dims != b.hidden_dims) return a.hidden_dims < b.hidden_dims;
    return a.beta < b.beta;
  };
  result.best = result.table.front();
  for (const GridCell& c : result.table)
    if (better(c, result.best)) result.best = c;
  return result;
}

namespace {

// Reraises with the failing stage named, keeping the exception type (and
// with it the CLI's validation-vs-runtime exit code).
template <class Fn>
auto with_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const config_error& e) {
    throw config_error(std::string(stage) + ": " + e.what());
  } catch (const io_error& e) {
    throw io_error(std::string(stage) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(stage) + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(stage) + ": " + e.what());
  }
}

RunReport run_pipeline(const ExperimentConfig& cfg, bool with_cv, PipelineAudit* audit) {
  const auto t0 = std::chrono::steady_clock::now();

  const Dataset full = with_stage("data", [&] { return obtain_dataset(cfg); });
  const TemporalSplit split = with_stage(
      "temporal split", [&] { return temporal_split(full, cfg.split.val_cut, cfg.split.oot_cut); });
  const Dataset train = full.subset(split.train);
  const Dataset val = full.subset(split.validation);
  const Dataset oot = full.subset(split.oot);

  RunReport report;
  report.config = config_to_json(cfg);

  ExperimentConfig chosen = cfg;
  if (with_cv && !cfg.grid.empty()) {
    report.grid = with_stage("grid search", [&] { return grid_search(cfg, train, audit); });
    chosen.optim.eta = report.grid->best.eta;
    chosen.optim.beta = report.grid->best.beta;
    chosen.loss.lambda = report.grid->best.lambda;
    chosen.model.hidden_dims = report.grid->best.hidden_dims;
  }

  const RngStream master(cfg.training.seed);

  if (with_cv) {
    with_stage("cross-validation", [&] {
      const auto folds = time_based_folds(train, cfg.cv_k);
      for (std::size_t k = 0; k < folds.size(); ++k) {
        const Dataset fold_train = train.subset(folds[k].first);
        const Dataset fold_val = train.subset(folds[k].second);
        const Dataset fold_train_sm =
            maybe_smote(fold_train, chosen, master.fork(kCvSmote).fork(k).seed(), audit);
        if (audit) {
          audit_ids(&audit->training_ids, fold_train_sm);
          audit_ids(&audit->training_ids, fold_val);
        }
        const TrainResult tr =
            run_training(chosen, fold_train_sm, fold_val, master.fork(kCvFold).fork(k));
        report.folds.push_back(evaluate_dataset(tr.params, fold_val));
      }
    });
    report.aggregate = aggregate_folds(report.folds);
  }

  with_stage("final fit", [&] {
    const Dataset train_sm = maybe_smote(train, chosen, master.fork(kFinalSmote).seed(), audit);
    if (audit) {
      audit_ids(&audit->training_ids, train_sm);
      audit_ids(&audit->training_ids, val);
    }
    TrainResult final_fit = run_training(chosen, train_sm, val, master.fork(kFinalFit));
    report.validation = evaluate_dataset(final_fit.params, val);
    report.oot = evaluate_dataset(final_fit.params, oot);
    report.curves = final_fit.curves;
    report.energy_trace = std::move(final_fit.energy_trace);
    report.final_params = std::move(final_fit.params);
  });

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace

RunReport run_benchmark(const ExperimentConfig& cfg, PipelineAudit* audit) {
  return run_pipeline(cfg, true, audit);
}

RunReport run_single(const ExperimentConfig& cfg, PipelineAudit* audit) {
  return run_pipeline(cfg, false, audit);
}

namespace {

std::vector<std::pair<std::string, double>> read_id_value_csv(const std::string& path,
                                                              const std::string& value_column) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw io_error("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id," + value_column)
    throw io_error("'" + path + "': expected header 'id," + value_column + "', got '" + line +
                   "'");
  std::vector<std::pair<std::string, double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw io_error("'" + path + "': missing comma at line " + std::to_string(line_no));
    const std::string id = line.substr(0, comma);
    const std::string cell = line.substr(comma + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      rows.emplace_back(id, v);
    } catch (const std::exception&) {
      throw io_error("'" + path + "': unparsable value '" + cell + "' at line " +
                     std::to_string(line_no));
    }
  }
  return rows;
}

}  // namespace

RunReport score_external(const std::string& predictions_csv, const std::string& labels_csv) {
  const auto preds = read_id_value_csv(predictions_csv, "score");
  const auto labs = read_id_value_csv(labels_csv, "label");
  if (preds.size() != labs.size())
    throw std::invalid_argument("score_external: row counts differ (" +
                                std::to_string(preds.size()) + " predictions, " +
                                std::to_string(labs.size()) + " labels)");

  std::map<std::string, double> by_id;
  for (const auto& [id, score] : preds) {
    if (!by_id.emplace(id, score).second)
      throw std::invalid_argument("score_external: duplicate prediction id '" + id + "'");
  }
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& [id, lab] : labs) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw std::invalid_argument("score_external: no prediction for id '" + id + "'");
    if (lab != 0.0 && lab != 1.0)
      throw std::invalid_argument("score_external: label for id '" + id + "' is not 0/1");
    scores.push_back(it->second);
    labels.push_back(static_cast<int>(lab));
  }

  RunReport report;
  report.external = true;
  report.validation = evaluate_scores(scores, labels, 0.5);
  return report;
}

nlohmann::ordered_json report_to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = "hamnn-report-v1";
  j["external"] = report.external;
  if (report.external) {
    j["metrics"] = metrics_to_json(report.validation);
    return j;
  }
  j["config"] = report.config;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : report.folds) j["folds"].push_back(metrics_to_json(f));
  j["aggregate"] = report.aggregate ? aggregate_to_json(*report.aggregate)
                                    : nlohmann::ordered_json(nullptr);
  j["validation"] = metrics_to_json(report.validation);
  j["oot"] = metrics_to_json(report.oot);
  j["curves"] = {{"train_loss", report.curves.train_loss},
                 {"val_loss", report.curves.val_loss},
                 {"best_epoch", report.curves.best_epoch},
                 {"epochs_run", report.curves.epochs_run}};
  if (report.grid) {
    nlohmann::ordered_json g;
    g["best"] = grid_cell_to_json(report.grid->best);
    g["table"] = nlohmann::ordered_json::array();
    for (const auto& c : report.grid->table) g["table"].push_back(grid_cell_to_json(c));
    j["grid"] = g;
  } else {
    j["grid"] = nullptr;
  }
  j["energy_trace"] = report.energy_trace_path.empty()
                          ? nlohmann::ordered_json(nullptr)
                          : nlohmann::ordered_json(report.energy_trace_path);
  j["wall_clock_seconds"] = report.wall_clock_seconds;
  return j;
}

void export_report_json(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << report_to_json(report).dump(2) << "\n";
  if (!out) throw io_error("write failed for '" + path + "'");
}

void export_summary_csv(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "set,accuracy,precision,recall,f1,auc\n";
  if (report.external) {
    write_summary_row(out, "external", report.validation);
    return;
  }
  for (std::size_t i = 0; i < report.folds.size(); ++i)
    write_summary_row(out, "fold" + std::to_string(i + 1), report.folds[i]);
  if (report.aggregate) {
    const FoldAggregate& a = *report.aggregate;
    MetricsReport mean{a.accuracy.mean, a.precision.mean, a.recall.mean, a.f1.mean, a.auc.mean,
                       false};
    MetricsReport stddev{a.accuracy.stddev, a.precision.stddev, a.recall.stddev, a.f1.stddev,
                         a.auc.stddev, false};
    write_summary_row(out, "mean", mean);
    write_summary_row(out, "std", stddev);
  }
  write_summary_row(out, "validation", report.validation);
  write_summary_row(out, "oot", report.oot);
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace hamnn
