#include <fstream>
#include <set>
#include <sstream>

#include "hamnn/errors.hpp"
#include "hamnn/experiment.hpp"

namespace hamnn {

namespace {

using nlohmann::json;

struct Violations {
  std::vector<std::string> items;

  void add(const std::string& msg) { items.push_back(msg); }
  void raise_if_any() const {
    if (items.empty()) return;
    std::ostringstream os;
    os << "invalid config (" << items.size() << " problem" << (items.size() > 1 ? "s" : "")
       << "):";
    for (const auto& m : items) os << "\n  - " << m;
    throw config_error(os.str());
  }
};

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed, Violations& errs) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known) errs.add("unknown key '" + item.key() + "' in section '" + section + "'");
  }
}

template <class T>
void read_field(const json& j, const char* key, T& out, const std::string& section,
                Violations& errs) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    errs.add("bad value for '" + section + "." + key + "': " + e.what());
  }
}

Activation parse_activation(const std::string& tok, const std::string& section,
                            Violations& errs) {
  if (tok == "leaky_relu") return Activation::LeakyRelu;
  if (tok == "relu") return Activation::Relu;
  if (tok == "tanh") return Activation::Tanh;
  errs.add("bad value for '" + section + ".activation': expected leaky_relu, relu or tanh");
  return Activation::LeakyRelu;
}

std::string activation_token(Activation a) {
  switch (a) {
    case Activation::LeakyRelu:
      return "leaky_relu";
    case Activation::Relu:
      return "relu";
    case Activation::Tanh:
      return "tanh";
  }
  return "leaky_relu";
}

}  // namespace

ExperimentConfig parse_config_json(const json& j) {
  Violations errs;
  ExperimentConfig cfg;

  if (!j.is_object()) {
    errs.add("top level must be an object");
    errs.raise_if_any();
  }
  check_keys(j, "(top level)",
             {"data", "split", "smote", "model", "loss", "optimizer", "training", "cv", "grid"},
             errs);

  if (!j.contains("data")) {
    errs.add("missing required section 'data'");
  } else {
    const json& d = j.at("data");
    check_keys(d, "data", {"csv", "generator"}, errs);
    const bool has_csv = d.contains("csv");
    const bool has_gen = d.contains("generator");
    if (has_csv == has_gen) {
      errs.add("section 'data' must contain exactly one of 'csv' or 'generator'");
    } else if (has_csv) {
      std::string path;
      read_field(d, "csv", path, "data", errs);
      cfg.data.csv_path = path;
    } else {
      const json& g = d.at("generator");
      check_keys(g, "data.generator",
                 {"n_rows", "n_features", "base_default_rate", "drift_magnitude", "n_periods",
                  "horizon_months", "seed"},
                 errs);
      DriftGenConfig gen;
      read_field(g, "n_rows", gen.n_rows, "data.generator", errs);
      read_field(g, "n_features", gen.n_features, "data.generator", errs);
      read_field(g, "base_default_rate", gen.base_default_rate, "data.generator", errs);
      read_field(g, "drift_magnitude", gen.drift_magnitude, "data.generator", errs);
      read_field(g, "n_periods", gen.n_periods, "data.generator", errs);
      read_field(g, "horizon_months", gen.horizon_months, "data.generator", errs);
      read_field(g, "seed", gen.seed, "data.generator", errs);
      cfg.data.generator = gen;
    }
  }

  if (!j.contains("split")) {
    errs.add("missing required section 'split'");
  } else {
    const json& s = j.at("split");
    check_keys(s, "split", {"val_cut", "oot_cut"}, errs);
    if (!s.contains("val_cut") || !s.contains("oot_cut"))
      errs.add("section 'split' requires 'val_cut' and 'oot_cut'");
    read_field(s, "val_cut", cfg.split.val_cut, "split", errs);
    read_field(s, "oot_cut", cfg.split.oot_cut, "split", errs);
  }

  if (j.contains("smote")) {
    const json& s = j.at("smote");
    check_keys(s, "smote", {"enabled", "k_neighbors", "target_ratio", "standardize"}, errs);
    read_field(s, "enabled", cfg.smote.enabled, "smote", errs);
    read_field(s, "k_neighbors", cfg.smote.k_neighbors, "smote", errs);
    read_field(s, "target_ratio", cfg.smote.target_ratio, "smote", errs);
    read_field(s, "standardize", cfg.smote.standardize, "smote", errs);
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, "model", {"hidden_dims", "dropout_rate", "activation", "leaky_slope"}, errs);
    read_field(m, "hidden_dims", cfg.model.hidden_dims, "model", errs);
    read_field(m, "dropout_rate", cfg.model.dropout_rate, "model", errs);
    if (m.contains("activation")) {
      std::string tok;
      read_field(m, "activation", tok, "model", errs);
      if (!tok.empty()) cfg.model.activation = parse_activation(tok, "model", errs);
    }
    read_field(m, "leaky_slope", cfg.model.leaky_slope, "model", errs);
  }

  if (j.contains("loss")) {
    const json& l = j.at("loss");
    check_keys(l, "loss", {"lambda", "exclude_biases"}, errs);
    read_field(l, "lambda", cfg.loss.lambda, "loss", errs);
    read_field(l, "exclude_biases", cfg.loss.exclude_biases, "loss", errs);
  }

  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    check_keys(o, "optimizer", {"kind", "eta", "beta", "epsilon", "per_tensor_hamiltonian"},
               errs);
    if (o.contains("kind")) {
      std::string tok;
      read_field(o, "kind", tok, "optimizer", errs);
      if (tok == "symplectic")
        cfg.optimizer_kind = OptimizerKind::Symplectic;
      else if (tok == "sgd_momentum")
        cfg.optimizer_kind = OptimizerKind::SgdMomentum;
      else if (!tok.empty())
        errs.add("bad value for 'optimizer.kind': expected symplectic or sgd_momentum");
    }
    read_field(o, "eta", cfg.optim.eta, "optimizer", errs);
    read_field(o, "beta", cfg.optim.beta, "optimizer", errs);
    read_field(o, "epsilon", cfg.optim.epsilon, "optimizer", errs);
    read_field(o, "per_tensor_hamiltonian", cfg.optim.per_tensor_hamiltonian, "optimizer", errs);
  }

  if (j.contains("training")) {
    const json& t = j.at("training");
    check_keys(t, "training", {"max_epochs", "batch_size", "patience", "seed"}, errs);
    read_field(t, "max_epochs", cfg.training.max_epochs, "training", errs);
    read_field(t, "batch_size", cfg.training.batch_size, "training", errs);
    read_field(t, "patience", cfg.training.patience, "training", errs);
    read_field(t, "seed", cfg.training.seed, "training", errs);
  }

  if (j.contains("cv")) {
    const json& c = j.at("cv");
    check_keys(c, "cv", {"k"}, errs);
    read_field(c, "k", cfg.cv_k, "cv", errs);
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, "grid", {"eta", "lambda", "beta", "hidden_dims"}, errs);
    read_field(g, "eta", cfg.grid.eta, "grid", errs);
    read_field(g, "lambda", cfg.grid.lambda, "grid", errs);
    read_field(g, "beta", cfg.grid.beta, "grid", errs);
    read_field(g, "hidden_dims", cfg.grid.hidden_dims, "grid", errs);
  }

  // Semantic validation, all violations reported together.
  if (cfg.data.generator) {
    try {
      cfg.data.generator->validate();
    } catch (const std::exception& e) {
      errs.add(std::string("data.generator: ") + e.what());
    }
  }
  if (!(cfg.split.val_cut < cfg.split.oot_cut))
    errs.add("split: val_cut must be < oot_cut");
  if (cfg.smote.k_neighbors < 1) errs.add("smote: k_neighbors must be >= 1");
  if (!(cfg.smote.target_ratio > 0.0 && cfg.smote.target_ratio <= 1.0))
    errs.add("smote: target_ratio must be in (0, 1]");
  for (std::size_t dim : cfg.model.hidden_dims)
    if (dim < 1) errs.add("model: hidden dims must be >= 1");
  if (!(cfg.model.dropout_rate >= 0.0 && cfg.model.dropout_rate < 1.0))
    errs.add("model: dropout_rate must be in [0, 1)");
  if (!(cfg.loss.lambda >= 0.0)) errs.add("loss: lambda must be >= 0");
  if (!(cfg.optim.eta > 0.0)) errs.add("optimizer: eta must be > 0");
  if (!(cfg.optim.beta >= 0.0 && cfg.optim.beta < 1.0))
    errs.add("optimizer: beta must be in [0, 1)");
  if (!(cfg.optim.epsilon > 0.0)) errs.add("optimizer: epsilon must be > 0");
  if (cfg.training.max_epochs < 1) errs.add("training: max_epochs must be >= 1");
  if (cfg.training.batch_size < 1) errs.add("training: batch_size must be >= 1");
  if (cfg.cv_k < 2) errs.add("cv: k must be >= 2");
  for (double v : cfg.grid.eta)
    if (!(v > 0.0)) errs.add("grid: eta values must be > 0");
  for (double v : cfg.grid.lambda)
    if (!(v >= 0.0)) errs.add("grid: lambda values must be >= 0");
  for (double v : cfg.grid.beta)
    if (!(v >= 0.0 && v < 1.0)) errs.add("grid: beta values must be in [0, 1)");
  for (const auto& dims : cfg.grid.hidden_dims)
    for (std::size_t dim : dims)
      if (dim < 1) errs.add("grid: hidden dims must be >= 1");

  errs.raise_if_any();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error("config '" + path + "' failed to parse: " + e.what());
  }
  return parse_config_json(j);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  if (cfg.data.csv_path) {
    j["data"]["csv"] = *cfg.data.csv_path;
  } else if (cfg.data.generator) {
    const DriftGenConfig& g = *cfg.data.generator;
    j["data"]["generator"] = {{"n_rows", g.n_rows},
                              {"n_features", g.n_features},
                              {"base_default_rate", g.base_default_rate},
                              {"drift_magnitude", g.drift_magnitude},
                              {"n_periods", g.n_periods},
                              {"horizon_months", g.horizon_months},
                              {"seed", g.seed}};
  }
  j["split"] = {{"val_cut", cfg.split.val_cut}, {"oot_cut", cfg.split.oot_cut}};
  j["smote"] = {{"enabled", cfg.smote.enabled},
                {"k_neighbors", cfg.smote.k_neighbors},
                {"target_ratio", cfg.smote.target_ratio},
                {"standardize", cfg.smote.standardize}};
  j["model"] = {{"hidden_dims", cfg.model.hidden_dims},
                {"dropout_rate", cfg.model.dropout_rate},
                {"activation", activation_token(cfg.model.activation)},
                {"leaky_slope", cfg.model.leaky_slope}};
  j["loss"] = {{"lambda", cfg.loss.lambda}, {"exclude_biases", cfg.loss.exclude_biases}};
  j["optimizer"] = {
      {"kind", cfg.optimizer_kind == OptimizerKind::Symplectic ? "symplectic" : "sgd_momentum"},
      {"eta", cfg.optim.eta},
      {"beta", cfg.optim.beta},
      {"epsilon", cfg.optim.epsilon},
      {"per_tensor_hamiltonian", cfg.optim.per_tensor_hamiltonian}};
  j["training"] = {{"max_epochs", cfg.training.max_epochs},
                   {"batch_size", cfg.training.batch_size},
                   {"patience", cfg.training.patience},
                   {"seed", cfg.training.seed}};
  j["cv"] = {{"k", cfg.cv_k}};
  if (!cfg.grid.empty()) {
    nlohmann::ordered_json g;
    if (!cfg.grid.eta.empty()) g["eta"] = cfg.grid.eta;
    if (!cfg.grid.lambda.empty()) g["lambda"] = cfg.grid.lambda;
    if (!cfg.grid.beta.empty()) g["beta"] = cfg.grid.beta;
    if (!cfg.grid.hidden_dims.empty()) g["hidden_dims"] = cfg.grid.hidden_dims;
    j["grid"] = g;
  }
  return j;
}

}  // namespace hamnn
