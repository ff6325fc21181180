#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hamnn/mlp.hpp"
#include "hamnn/tensor.hpp"

namespace hamnn {

struct OptimConfig {
  double eta = 0.01;      // learning rate, > 0
  double beta = 0.9;      // momentum decay, in [0, 1)
  double epsilon = 1e-8;  // guards the square root, > 0
  // Energy is computed per parameter tensor by default; the global variant
  // divides every update by the square root of the summed energy instead.
  bool per_tensor_hamiltonian = true;
  // Test hook: when set, apply_update uses this value in place of the
  // computed energy.
  std::optional<double> hamiltonian_override;

  void validate() const;
};

// Kinetic/potential/total energy of one parameter tensor and its momentum.
struct EnergyTriple {
  double kinetic = 0.0;      // 0.5 * ||v||^2
  double potential = 0.0;    // 0.5 * ||theta||^2
  double hamiltonian = 0.0;  // kinetic + potential
};

// Per-tensor optimizer state, aligned with the parameter registry.
struct ParamState {
  std::vector<std::string> names;
  std::vector<Tensor> momentum;  // zero-initialized buffers, one per tensor
  std::vector<EnergyTriple> last_energy;
};

ParamState init_state(const MlpParams& params);

// beta * v + (1 - beta) * g, elementwise.
Tensor momentum_update(const Tensor& v, const Tensor& g, double beta);

EnergyTriple compute_energy(const Tensor& theta, const Tensor& v);

// theta - eta * v / sqrt(H + epsilon); the divisor is one scalar per tensor.
Tensor apply_update(const Tensor& theta, const Tensor& v, const OptimConfig& cfg, double h);

// One optimizer step over every registry tensor: update momentum, compute the
// energy from the updated momentum and the pre-update parameters, then apply
// the normalized update. Returns the per-tensor energy trace for this step.
std::vector<EnergyTriple> step(MlpParams& params, const ParamGrads& grads, ParamState& state,
                               const OptimConfig& cfg);

// Classical heavy-ball baseline: v <- beta*v + g; theta <- theta - eta*v.
void sgd_momentum_step(MlpParams& params, const ParamGrads& grads, ParamState& state,
                       double eta, double beta);

// One energy-trace row: per optimizer step and parameter tensor.
struct EnergyRecord {
  std::size_t step = 0;
  std::string tensor_name;
  double kinetic = 0.0;
  double potential = 0.0;
  double hamiltonian = 0.0;
};

// CSV with header "step,tensor_name,K,V,H".
void export_energy_trace(const std::vector<EnergyRecord>& trace, const std::string& path);

}  // namespace hamnn
