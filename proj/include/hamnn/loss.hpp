#pragma once

#include "hamnn/mlp.hpp"
#include "hamnn/tensor.hpp"

namespace hamnn {

struct LossConfig {
  double lambda = 0.01;         // regularization strength, >= 0
  bool exclude_biases = false;  // when set, only weights enter the penalty

  void validate() const;
};

struct LossBreakdown {
  double base = 0.0;   // mean binary cross-entropy
  double reg = 0.0;    // 0.5 * sum of squared parameters
  double total = 0.0;  // base + lambda * reg
};

// Mean over the batch of -[y ln p + (1-y) ln(1-p)], with probabilities
// clamped to [1e-12, 1 - 1e-12] before the logs.
double bce_loss(const Tensor& probs, const Tensor& labels);

// Per-element derivative of bce_loss w.r.t. each probability:
// (p - y) / (p (1 - p)) / n, evaluated at the clamped probability.
Tensor bce_grad(const Tensor& probs, const Tensor& labels);

// 0.5 * sum over registry tensors of squared entries.
double l2_regularizer(const MlpParams& params, bool exclude_biases = false);

// Total loss base + lambda * reg. Gradient contract:
// d total / d theta = d base / d theta + lambda * theta.
LossBreakdown hamiltonian_loss(const Tensor& probs, const Tensor& labels,
                               const MlpParams& params, const LossConfig& cfg);

// Adds the regularizer's contribution (lambda * theta) in place.
void add_regularizer_grad(const MlpParams& params, const LossConfig& cfg, ParamGrads& grads);

}  // namespace hamnn
