#include "hamnn/optimizer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "hamnn/errors.hpp"

namespace hamnn {

void OptimConfig::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("OptimConfig: eta must be > 0");
  if (!(beta >= 0.0 && beta < 1.0))
    throw std::invalid_argument("OptimConfig: beta must be in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("OptimConfig: epsilon must be > 0");
}

ParamState init_state(const MlpParams& params) {
  ParamState state;
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    state.names.push_back(params.tensor_name(i));
    state.momentum.push_back(Tensor::zeros_like(params.tensor(i)));
    state.last_energy.push_back({});
  }
  return state;
}

Tensor momentum_update(const Tensor& v, const Tensor& g, double beta) {
  if (!v.same_shape(g)) throw shape_error("momentum_update: shape mismatch");
  Tensor out = Tensor::zeros_like(v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = beta * v[i] + (1.0 - beta) * g[i];
  return out;
}

EnergyTriple compute_energy(const Tensor& theta, const Tensor& v) {
  if (!theta.same_shape(v)) throw shape_error("compute_energy: shape mismatch");
  EnergyTriple e;
  e.kinetic = 0.5 * squared_norm(v);
  e.potential = 0.5 * squared_norm(theta);
  e.hamiltonian = e.kinetic + e.potential;
  return e;
}

Tensor apply_update(const Tensor& theta, const Tensor& v, const OptimConfig& cfg, double h) {
  if (!theta.same_shape(v)) throw shape_error("apply_update: shape mismatch");
  const double scale = cfg.eta / std::sqrt(h + cfg.epsilon);
  Tensor out = theta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= scale * v[i];
  return out;
}

namespace {

void check_alignment(const MlpParams& params, const ParamGrads& grads, const ParamState& state) {
  if (grads.tensors.size() != params.tensor_count() ||
      state.momentum.size() != params.tensor_count())
    throw std::logic_error("step: gradient/state registry size mismatch");
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    if (grads.names[i] != params.tensor_name(i))
      throw std::logic_error("step: missing gradient for " + params.tensor_name(i));
    if (!grads.tensors[i].same_shape(params.tensor(i)))
      throw shape_error("step: gradient shape mismatch for " + params.tensor_name(i));
  }
}

}  // namespace

std::vector<EnergyTriple> step(MlpParams& params, const ParamGrads& grads, ParamState& state,
                               const OptimConfig& cfg) {
  cfg.validate();
  check_alignment(params, grads, state);
  const std::size_t n = params.tensor_count();

  // Momentum first, then the energy from the updated momentum and the
  // pre-update parameters, then the normalized parameter update.
  std::vector<Tensor> new_momentum(n);
  std::vector<EnergyTriple> energies(n);
  for (std::size_t i = 0; i < n; ++i) {
    new_momentum[i] = momentum_update(state.momentum[i], grads.tensors[i], cfg.beta);
    energies[i] = compute_energy(params.tensor(i), new_momentum[i]);
  }

  double global_h = 0.0;
  if (!cfg.per_tensor_hamiltonian) {
    for (const auto& e : energies) global_h += e.hamiltonian;
  }

  for (std::size_t i = 0; i < n; ++i) {
    double h = cfg.per_tensor_hamiltonian ? energies[i].hamiltonian : global_h;
    if (cfg.hamiltonian_override) h = *cfg.hamiltonian_override;
    params.tensor(i) = apply_update(params.tensor(i), new_momentum[i], cfg, h);
    state.momentum[i] = std::move(new_momentum[i]);
    state.last_energy[i] = energies[i];
  }
  return energies;
}

void sgd_momentum_step(MlpParams& params, const ParamGrads& grads, ParamState& state,
                       double eta, double beta) {
  check_alignment(params, grads, state);
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    Tensor& v = state.momentum[i];
    const Tensor& g = grads.tensors[i];
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = beta * v[j] + g[j];
    Tensor& theta = params.tensor(i);
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= eta * v[j];
  }
}

void export_energy_trace(const std::vector<EnergyRecord>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "step,tensor_name,K,V,H\n";
  char buf[40];
  for (const auto& r : trace) {
    out << r.step << "," << r.tensor_name;
    std::snprintf(buf, sizeof buf, "%.17g", r.kinetic);
    out << "," << buf;
    std::snprintf(buf, sizeof buf, "%.17g", r.potential);
    out << "," << buf;
    std::snprintf(buf, sizeof buf, "%.17g", r.hamiltonian);
    out << "," << buf << "\n";
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace hamnn
