#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hamnn/rng.hpp"
#include "hamnn/tensor.hpp"

namespace hamnn {

enum class Activation { LeakyRelu, Relu, Tanh };

// Architecture of the feed-forward binary classifier: a stack of hidden
// layers followed by a single sigmoid output unit.
struct LayerSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  double dropout_rate = 0.0;  // in [0, 1)
  Activation activation = Activation::LeakyRelu;
  double leaky_slope = 0.01;

  void validate() const;  // throws std::invalid_argument
};

// Parameters of one dense layer, y = W x + b with W[out x in].
struct DenseLayer {
  Tensor weight;
  Tensor bias;
};

// Full parameter set plus a stable, ordered registry of named tensors.
// Registry order is layer0.weight, layer0.bias, layer1.weight, ... and the
// optimizer keys its state off that order.
struct MlpParams {
  LayerSpec spec;
  std::vector<DenseLayer> layers;

  std::size_t layer_count() const { return layers.size(); }
  std::size_t tensor_count() const { return 2 * layers.size(); }
  std::size_t parameter_count() const;

  std::string tensor_name(std::size_t i) const;
  Tensor& tensor(std::size_t i);
  const Tensor& tensor(std::size_t i) const;
};

// Everything backward needs to replay the forward pass: pre-activations,
// post-activation (and post-dropout) outputs, the dropout masks actually
// applied, and the final probabilities.
struct ForwardCache {
  Tensor input;                       // batch x in
  std::vector<Tensor> pre_acts;       // per layer, batch x out
  std::vector<Tensor> activations;    // per hidden layer, batch x out
  std::vector<Tensor> dropout_masks;  // per hidden layer; entries 0 or 1/keep
  Tensor probs;                       // batch
  bool train_mode = false;
};

enum class ForwardMode { Train, Eval };

// Gradients aligned with the parameter registry.
struct ParamGrads {
  std::vector<std::string> names;
  std::vector<Tensor> tensors;
};

double leaky_relu(double x, double slope);
double sigmoid(double z);

// He-initialized weights (Normal(0, sqrt(2/fan_in))), zero biases.
MlpParams init_params(const LayerSpec& spec, RngStream& rng);

// Row-wise probabilities plus the cache for backward. Train mode applies
// inverted dropout (activations scaled by 1/keep at train time) and requires
// an rng; Eval is deterministic.
std::pair<Tensor, ForwardCache> forward(const MlpParams& params, const Tensor& x,
                                        ForwardMode mode, RngStream* rng = nullptr);

// Exact gradients of the scalar whose per-row derivative w.r.t. the output
// probabilities is dloss_dprob, chained through the cached forward pass.
ParamGrads backward(const MlpParams& params, const ForwardCache& cache,
                    const Tensor& dloss_dprob);

void save_params(const MlpParams& params, const std::string& path);
MlpParams load_params(const std::string& path);

}  // namespace hamnn
