#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "hamnn/errors.hpp"
#include "hamnn/experiment.hpp"
#include "hamnn/integrators.hpp"

namespace {

namespace fs = std::filesystem;
using namespace hamnn;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  std::optional<std::string> optimizer;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "override training.seed");
  cmd->add_option("--horizon", opts.horizon, "override generator horizon (12, 36 or 60)")
      ->check(CLI::IsMember({12, 36, 60}));
  cmd->add_option("--optimizer", opts.optimizer, "override optimizer kind")
      ->check(CLI::IsMember({"symplectic", "sgd"}));
}

ExperimentConfig load_config(const CommonOpts& opts) {
  ExperimentConfig cfg = parse_config(opts.config_path);
  if (opts.seed) cfg.training.seed = *opts.seed;
  if (opts.horizon) {
    if (!cfg.data.generator)
      throw config_error("--horizon requires a generator data source");
    cfg.data.generator->horizon_months = *opts.horizon;
  }
  if (opts.optimizer)
    cfg.optimizer_kind = *opts.optimizer == "symplectic" ? OptimizerKind::Symplectic
                                                         : OptimizerKind::SgdMomentum;
  return cfg;
}

fs::path ensure_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_run_outputs(RunReport& report, const fs::path& out) {
  report.energy_trace_path = report.energy_trace.empty() ? "" : "energy_trace.csv";
  export_energy_trace(report.energy_trace, (out / "energy_trace.csv").string());
  export_report_json(report, (out / "report.json").string());
  export_summary_csv(report, (out / "summary.csv").string());
  save_params(report.final_params, (out / "params.txt").string());
}

void print_metrics(const std::string& name, const MetricsReport& m) {
  std::cout << name << ": accuracy=" << m.accuracy << " precision=" << m.precision
            << " recall=" << m.recall << " f1=" << m.f1 << " auc=" << m.auc << "\n";
}

int cmd_generate(const CommonOpts& opts) {
  ExperimentConfig cfg = load_config(opts);
  if (!cfg.data.generator)
    throw config_error("generate requires a generator data source in the config");
  const Dataset ds = synthesize_credit_data(*cfg.data.generator);
  const fs::path out = ensure_out_dir(opts.out_dir);
  write_csv(ds, (out / "dataset.csv").string());
  std::size_t defaults = 0;
  for (int l : ds.labels) defaults += static_cast<std::size_t>(l);
  std::cout << "wrote " << (out / "dataset.csv").string() << " (" << ds.n_rows() << " rows, "
            << ds.n_features() << " features, default rate "
            << static_cast<double>(defaults) / static_cast<double>(ds.n_rows()) << ")\n";
  return kExitOk;
}

int cmd_train(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(opts);
  RunReport report = run_single(cfg);
  const fs::path out = ensure_out_dir(opts.out_dir);
  write_run_outputs(report, out);
  print_metrics("validation", report.validation);
  print_metrics("oot", report.oot);
  std::cout << "report: " << (out / "report.json").string() << "\n";
  return kExitOk;
}

int cmd_grid(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(opts);
  if (cfg.grid.empty()) throw config_error("grid requires a 'grid' section with axes");
  Dataset full = cfg.data.csv_path ? load_csv(*cfg.data.csv_path)
                                   : synthesize_credit_data(*cfg.data.generator);
  const TemporalSplit split = temporal_split(full, cfg.split.val_cut, cfg.split.oot_cut);
  const GridSearchResult res = grid_search(cfg, full.subset(split.train));

  const fs::path out = ensure_out_dir(opts.out_dir);
  std::ofstream table((out / "grid_table.csv").string());
  table << "eta,lambda,beta,hidden_dims,mean_val_auc\n";
  for (const auto& c : res.table) {
    table << c.eta << "," << c.lambda << "," << c.beta << ",\"[";
    for (std::size_t i = 0; i < c.hidden_dims.size(); ++i)
      table << (i ? " " : "") << c.hidden_dims[i];
    table << "]\"," << c.mean_val_auc << "\n";
  }
  ExperimentConfig best_cfg = cfg;
  best_cfg.optim.eta = res.best.eta;
  best_cfg.optim.beta = res.best.beta;
  best_cfg.loss.lambda = res.best.lambda;
  best_cfg.model.hidden_dims = res.best.hidden_dims;
  best_cfg.grid = GridAxes{};
  std::ofstream best((out / "best_config.json").string());
  best << config_to_json(best_cfg).dump(2) << "\n";
  std::cout << "evaluated " << res.table.size() << " cells; best mean validation AUC "
            << res.best.mean_val_auc << " at eta=" << res.best.eta
            << " lambda=" << res.best.lambda << " beta=" << res.best.beta << "\n";
  return kExitOk;
}

int cmd_benchmark(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(opts);
  RunReport report = run_benchmark(cfg);
  const fs::path out = ensure_out_dir(opts.out_dir);
  write_run_outputs(report, out);
  if (report.aggregate) {
    std::cout << "cv mean auc: " << report.aggregate->auc.mean << " (std "
              << report.aggregate->auc.stddev << ", " << report.aggregate->n_folds
              << " folds)\n";
  }
  print_metrics("validation", report.validation);
  print_metrics("oot", report.oot);
  std::cout << "report: " << (out / "report.json").string() << "\n";
  return kExitOk;
}

struct ScoreOpts {
  std::string predictions;
  std::string labels;
  std::string out_dir = ".";
};

int cmd_score_external(const ScoreOpts& opts) {
  RunReport report = score_external(opts.predictions, opts.labels);
  const fs::path out = ensure_out_dir(opts.out_dir);
  export_report_json(report, (out / "report.json").string());
  export_summary_csv(report, (out / "summary.csv").string());
  print_metrics("external", report.validation);
  return kExitOk;
}

struct IntegrateOpts {
  std::string system = "oscillator";
  std::string method = "leapfrog";
  double dt = 0.05;
  std::size_t steps = 1000;
  double q0 = 1.0;
  double p0 = 0.0;
  bool negative_drift = false;
  std::string out_dir = ".";
};

int cmd_integrate(const IntegrateOpts& opts) {
  const SeparableHamiltonian sys = opts.system == "pendulum" ? pendulum() : harmonic_oscillator();
  Integrator kind = Integrator::Leapfrog;
  if (opts.method == "explicit_euler") kind = Integrator::ExplicitEuler;
  else if (opts.method == "symplectic_euler") kind = Integrator::SymplecticEuler;
  else if (opts.method == "leapfrog") kind = Integrator::Leapfrog;
  else if (opts.method == "forest_ruth") kind = Integrator::ForestRuth;

  PhaseState s0{{opts.q0}, {opts.p0}, 0.0};
  const Trajectory traj =
      integrate(sys, s0, opts.dt, opts.steps, kind,
                opts.negative_drift ? DriftSign::Negative : DriftSign::Positive);
  const fs::path out = ensure_out_dir(opts.out_dir);
  export_trajectory_csv(traj, (out / "trajectory.csv").string());
  const DriftStats drift = energy_drift(traj);
  std::cout << opts.method << " on " << opts.system << ": " << opts.steps << " steps at dt="
            << opts.dt << ", H0=" << traj.energies.front()
            << ", max |H-H0|=" << drift.max_abs_deviation
            << ", drift slope=" << drift.linear_drift_rate << "\n"
            << "trajectory: " << (out / "trajectory.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian-inspired neural network training and evaluation toolkit"};
  app.require_subcommand(1);

  CommonOpts gen_opts, train_opts, grid_opts, bench_opts;
  ScoreOpts score_opts;
  IntegrateOpts int_opts;

  add_common(app.add_subcommand("generate", "write a synthetic credit dataset as CSV"),
             gen_opts);
  add_common(app.add_subcommand("train", "single training run with early stopping"), train_opts);
  add_common(app.add_subcommand("grid", "grid search over the configured axes"), grid_opts);
  add_common(app.add_subcommand("benchmark", "full protocol: CV, final fit, OOT evaluation"),
             bench_opts);

  auto* score = app.add_subcommand("score-external", "score a prediction file against labels");
  score->add_option("--predictions", score_opts.predictions, "CSV with header id,score")
      ->required();
  score->add_option("--labels", score_opts.labels, "CSV with header id,label")->required();
  score->add_option("--out", score_opts.out_dir, "output directory");

  auto* integ = app.add_subcommand("integrate", "run a reference integrator demo");
  integ->add_option("--system", int_opts.system, "oscillator or pendulum")
      ->check(CLI::IsMember({"oscillator", "pendulum"}));
  integ->add_option("--method", int_opts.method, "integrator")
      ->check(CLI::IsMember({"explicit_euler", "symplectic_euler", "leapfrog", "forest_ruth"}));
  integ->add_option("--dt", int_opts.dt, "step size")->check(CLI::PositiveNumber);
  integ->add_option("--steps", int_opts.steps, "number of steps");
  integ->add_option("--q0", int_opts.q0, "initial position");
  integ->add_option("--p0", int_opts.p0, "initial momentum");
  integ->add_flag("--negative-drift", int_opts.negative_drift,
                  "use the negated position drift in the symplectic Euler step");
  integ->add_option("--out", int_opts.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (app.got_subcommand("generate")) return cmd_generate(gen_opts);
    if (app.got_subcommand("train")) return cmd_train(train_opts);
    if (app.got_subcommand("grid")) return cmd_grid(grid_opts);
    if (app.got_subcommand("benchmark")) return cmd_benchmark(bench_opts);
    if (app.got_subcommand("score-external")) return cmd_score_external(score_opts);
    if (app.got_subcommand("integrate")) return cmd_integrate(int_opts);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
