#pragma once

// Shared oracles for the test suites: finite-difference gradients, random
// network/batch generators, and a convergence-order fit for the integrators.
// Everything here is independent of the implementation paths it checks.

#include <cmath>
#include <utility>
#include <vector>

#include "hamnn/integrators.hpp"
#include "hamnn/loss.hpp"
#include "hamnn/mlp.hpp"
#include "hamnn/rng.hpp"
#include "hamnn/tensor.hpp"

namespace testsup {

inline double full_loss(const hamnn::MlpParams& params, const hamnn::Tensor& x,
                        const hamnn::Tensor& y, const hamnn::LossConfig& cfg) {
  const auto [probs, cache] = hamnn::forward(params, x, hamnn::ForwardMode::Eval);
  return hamnn::hamiltonian_loss(probs, y, params, cfg).total;
}

inline hamnn::ParamGrads analytic_grads(const hamnn::MlpParams& params, const hamnn::Tensor& x,
                                        const hamnn::Tensor& y, const hamnn::LossConfig& cfg) {
  const auto [probs, cache] = hamnn::forward(params, x, hamnn::ForwardMode::Eval);
  hamnn::ParamGrads grads = hamnn::backward(params, cache, hamnn::bce_grad(probs, y));
  hamnn::add_regularizer_grad(params, cfg, grads);
  return grads;
}

// Central differences over every parameter, h fixed by the caller.
inline std::vector<hamnn::Tensor> numeric_grads(hamnn::MlpParams params, const hamnn::Tensor& x,
                                                const hamnn::Tensor& y,
                                                const hamnn::LossConfig& cfg, double h) {
  std::vector<hamnn::Tensor> out;
  for (std::size_t t = 0; t < params.tensor_count(); ++t) {
    hamnn::Tensor g = hamnn::Tensor::zeros_like(params.tensor(t));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double saved = params.tensor(t)[i];
      params.tensor(t)[i] = saved + h;
      const double up = full_loss(params, x, y, cfg);
      params.tensor(t)[i] = saved - h;
      const double down = full_loss(params, x, y, cfg);
      params.tensor(t)[i] = saved;
      g[i] = (up - down) / (2.0 * h);
    }
    out.push_back(std::move(g));
  }
  return out;
}

// Max relative disagreement between analytic and numeric gradients. The
// denominator is floored at 1e-3 so finite-difference cancellation noise
// (about 1e-9 for unit-scale losses at h = 1e-6) cannot dominate near-zero
// entries.
inline double max_grad_error(const hamnn::MlpParams& params, const hamnn::Tensor& x,
                             const hamnn::Tensor& y, const hamnn::LossConfig& cfg,
                             double h = 1e-6) {
  const hamnn::ParamGrads a = analytic_grads(params, x, y, cfg);
  const std::vector<hamnn::Tensor> n = numeric_grads(params, x, y, cfg, h);
  double worst = 0.0;
  for (std::size_t t = 0; t < a.tensors.size(); ++t) {
    for (std::size_t i = 0; i < a.tensors[t].size(); ++i) {
      const double av = a.tensors[t][i], nv = n[t][i];
      const double scale = std::max({std::fabs(av), std::fabs(nv), 1e-3});
      worst = std::max(worst, std::fabs(av - nv) / scale);
    }
  }
  return worst;
}

inline hamnn::LayerSpec random_small_spec(hamnn::RngStream& rng, std::size_t max_params = 50) {
  hamnn::LayerSpec spec;
  for (;;) {
    spec.input_dim = 1 + rng.next_below(4);
    spec.hidden_dims.clear();
    const std::size_t depth = rng.next_below(3);
    for (std::size_t i = 0; i < depth; ++i) spec.hidden_dims.push_back(1 + rng.next_below(4));
    spec.dropout_rate = 0.0;
    switch (rng.next_below(3)) {
      case 0:
        spec.activation = hamnn::Activation::LeakyRelu;
        break;
      case 1:
        spec.activation = hamnn::Activation::Relu;
        break;
      default:
        spec.activation = hamnn::Activation::Tanh;
        break;
    }
    std::size_t count = 0, fan = spec.input_dim;
    std::vector<std::size_t> dims = spec.hidden_dims;
    dims.push_back(1);
    for (std::size_t out : dims) {
      count += out * fan + out;
      fan = out;
    }
    if (count <= max_params) return spec;
  }
}

inline std::pair<hamnn::Tensor, hamnn::Tensor> random_batch(hamnn::RngStream& rng,
                                                            std::size_t batch, std::size_t dim) {
  hamnn::Tensor x({batch, dim});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal(0.0, 1.0);
  hamnn::Tensor y({batch});
  for (std::size_t i = 0; i < batch; ++i) y[i] = static_cast<double>(rng.next_below(2));
  return {x, y};
}

// Largest pointwise error over an integration from (q, p) = (1, 0) against
// the exact oscillator solution. Measured along the whole run, not just at
// the endpoint: first-order symplectic maps land back near the start after a
// complete period (the ellipse distortion cancels there), which would mask
// their order.
inline double oscillator_error(hamnn::Integrator kind, double dt, std::size_t n_steps) {
  const hamnn::SeparableHamiltonian sys = hamnn::harmonic_oscillator();
  hamnn::PhaseState s{{1.0}, {0.0}, 0.0};
  double worst = 0.0;
  for (std::size_t i = 0; i < n_steps; ++i) {
    switch (kind) {
      case hamnn::Integrator::ExplicitEuler:
        s = hamnn::explicit_euler_step(sys, s, dt);
        break;
      case hamnn::Integrator::SymplecticEuler:
        s = hamnn::symplectic_euler_step(sys, s, dt);
        break;
      case hamnn::Integrator::Leapfrog:
        s = hamnn::leapfrog_step(sys, s, dt);
        break;
      case hamnn::Integrator::ForestRuth:
        s = hamnn::forest_ruth_step(sys, s, dt);
        break;
    }
    const double t = static_cast<double>(i + 1) * dt;
    const double dq = s.q[0] - std::cos(t), dp = s.p[0] + std::sin(t);
    worst = std::max(worst, std::sqrt(dq * dq + dp * dp));
  }
  return worst;
}

// Least-squares slope of log error against log dt over one oscillator period,
// halving the step n_halvings times from dt0 = 2*pi / n0.
inline double fitted_order(hamnn::Integrator kind, std::size_t n0, int n_halvings) {
  std::vector<double> log_dt, log_err;
  std::size_t n = n0;
  for (int i = 0; i <= n_halvings; ++i, n *= 2) {
    const double dt = 2.0 * M_PI / static_cast<double>(n);
    log_dt.push_back(std::log(dt));
    log_err.push_back(std::log(oscillator_error(kind, dt, n)));
  }
  const double count = static_cast<double>(log_dt.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < log_dt.size(); ++i) {
    mx += log_dt[i];
    my += log_err[i];
  }
  mx /= count;
  my /= count;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < log_dt.size(); ++i) {
    num += (log_dt[i] - mx) * (log_err[i] - my);
    den += (log_dt[i] - mx) * (log_dt[i] - mx);
  }
  return num / den;
}

}  // namespace testsup
