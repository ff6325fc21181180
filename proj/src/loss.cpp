#include "hamnn/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "hamnn/errors.hpp"

namespace hamnn {

namespace {

constexpr double kEps = 1e-12;

double clamp_prob(double p) {
  if (p < kEps) return kEps;
  if (p > 1.0 - kEps) return 1.0 - kEps;
  return p;
}

void check_pair(const Tensor& probs, const Tensor& labels) {
  if (probs.size() != labels.size())
    throw shape_error("bce: probs length " + std::to_string(probs.size()) +
                      " != labels length " + std::to_string(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != 0.0 && labels[i] != 1.0)
      throw std::invalid_argument("bce: labels must be 0 or 1");
}

}  // namespace

void LossConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("LossConfig: lambda must be >= 0");
}

double bce_loss(const Tensor& probs, const Tensor& labels) {
  check_pair(probs, labels);
  const std::size_t n = probs.size();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = clamp_prob(probs[i]);
    acc -= labels[i] == 1.0 ? std::log(p) : std::log(1.0 - p);
  }
  return acc / static_cast<double>(n);
}

Tensor bce_grad(const Tensor& probs, const Tensor& labels) {
  check_pair(probs, labels);
  const std::size_t n = probs.size();
  Tensor g = Tensor::zeros_like(probs);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = clamp_prob(probs[i]);
    g[i] = (p - labels[i]) / (p * (1.0 - p)) / static_cast<double>(n);
  }
  return g;
}

double l2_regularizer(const MlpParams& params, bool exclude_biases) {
  double acc = 0.0;
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    if (exclude_biases && i % 2 == 1) continue;
    acc += squared_norm(params.tensor(i));
  }
  return 0.5 * acc;
}

LossBreakdown hamiltonian_loss(const Tensor& probs, const Tensor& labels,
                               const MlpParams& params, const LossConfig& cfg) {
  cfg.validate();
  LossBreakdown out;
  out.base = bce_loss(probs, labels);
  out.reg = l2_regularizer(params, cfg.exclude_biases);
  out.total = out.base + cfg.lambda * out.reg;
  return out;
}

void add_regularizer_grad(const MlpParams& params, const LossConfig& cfg, ParamGrads& grads) {
  if (grads.tensors.size() != params.tensor_count())
    throw std::logic_error("add_regularizer_grad: gradient registry size mismatch");
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    if (cfg.exclude_biases && i % 2 == 1) continue;
    axpy(cfg.lambda, params.tensor(i), grads.tensors[i]);
  }
}

}  // namespace hamnn
