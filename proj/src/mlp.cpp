#include "hamnn/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hamnn/errors.hpp"

namespace hamnn {

namespace {

constexpr double kProbClamp = 1e-15;

double activate(double z, Activation act, double slope) {
  switch (act) {
    case Activation::LeakyRelu:
      return z >= 0.0 ? z : slope * z;
    case Activation::Relu:
      return z >= 0.0 ? z : 0.0;
    case Activation::Tanh:
      return std::tanh(z);
  }
  return z;
}

double activate_grad(double z, Activation act, double slope) {
  switch (act) {
    case Activation::LeakyRelu:
      return z >= 0.0 ? 1.0 : slope;
    case Activation::Relu:
      return z >= 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

const char* activation_token(Activation act) {
  switch (act) {
    case Activation::LeakyRelu:
      return "leaky_relu";
    case Activation::Relu:
      return "relu";
    case Activation::Tanh:
      return "tanh";
  }
  return "leaky_relu";
}

Activation activation_from_token(const std::string& tok) {
  if (tok == "leaky_relu") return Activation::LeakyRelu;
  if (tok == "relu") return Activation::Relu;
  if (tok == "tanh") return Activation::Tanh;
  throw io_error("unknown activation token '" + tok + "'");
}

}  // namespace

void LayerSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("LayerSpec: input_dim must be >= 1");
  for (std::size_t d : hidden_dims)
    if (d < 1) throw std::invalid_argument("LayerSpec: hidden dims must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw std::invalid_argument("LayerSpec: dropout_rate must be in [0, 1)");
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::string MlpParams::tensor_name(std::size_t i) const {
  return "layer" + std::to_string(i / 2) + (i % 2 == 0 ? ".weight" : ".bias");
}

Tensor& MlpParams::tensor(std::size_t i) {
  DenseLayer& l = layers.at(i / 2);
  return i % 2 == 0 ? l.weight : l.bias;
}

const Tensor& MlpParams::tensor(std::size_t i) const {
  const DenseLayer& l = layers.at(i / 2);
  return i % 2 == 0 ? l.weight : l.bias;
}

double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

double sigmoid(double z) {
  double p;
  if (z >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    p = e / (1.0 + e);
  }
  if (p < kProbClamp) p = kProbClamp;
  if (p > 1.0 - kProbClamp) p = 1.0 - kProbClamp;
  return p;
}

MlpParams init_params(const LayerSpec& spec, RngStream& rng) {
  spec.validate();
  MlpParams params;
  params.spec = spec;
  std::size_t fan_in = spec.input_dim;
  std::vector<std::size_t> dims = spec.hidden_dims;
  dims.push_back(1);  // sigmoid output head
  for (std::size_t out : dims) {
    DenseLayer layer;
    layer.weight = Tensor({out, fan_in});
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < layer.weight.size(); ++i)
      layer.weight[i] = rng.normal(0.0, stddev);
    layer.bias = Tensor({out});
    params.layers.push_back(std::move(layer));
    fan_in = out;
  }
  return params;
}

std::pair<Tensor, ForwardCache> forward(const MlpParams& params, const Tensor& x,
                                        ForwardMode mode, RngStream* rng) {
  if (x.rank() != 2 || x.cols() != params.spec.input_dim) {
    throw shape_error("forward: input width " +
                      std::to_string(x.rank() == 2 ? x.cols() : 0) + " != input_dim " +
                      std::to_string(params.spec.input_dim));
  }
  const bool train = mode == ForwardMode::Train;
  if (train && rng == nullptr)
    throw std::logic_error("forward: Train mode requires an rng stream");

  ForwardCache cache;
  cache.input = x;
  cache.train_mode = train;
  const std::size_t batch = x.rows();
  const std::size_t n_layers = params.layers.size();
  const double keep = 1.0 - params.spec.dropout_rate;

  Tensor current = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const DenseLayer& layer = params.layers[l];
    Tensor z = matmul_transpose_b(current, layer.weight);  // batch x out
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t j = 0; j < z.cols(); ++j) z.at(i, j) += layer.bias[j];
    cache.pre_acts.push_back(z);

    if (l + 1 == n_layers) {
      Tensor probs({batch});
      for (std::size_t i = 0; i < batch; ++i) probs[i] = sigmoid(z.at(i, 0));
      cache.probs = probs;
      return {probs, std::move(cache)};
    }

    Tensor a = Tensor::zeros_like(z);
    for (std::size_t i = 0; i < a.size(); ++i)
      a[i] = activate(z[i], params.spec.activation, params.spec.leaky_slope);

    Tensor mask = Tensor::zeros_like(z);
    if (train && params.spec.dropout_rate > 0.0) {
      for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = rng->next_double() < keep ? 1.0 / keep : 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) a[i] *= mask[i];
    } else {
      for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = 1.0;
    }
    cache.dropout_masks.push_back(std::move(mask));
    cache.activations.push_back(a);
    current = std::move(a);
  }
  throw std::logic_error("forward: model has no layers");
}

ParamGrads backward(const MlpParams& params, const ForwardCache& cache,
                    const Tensor& dloss_dprob) {
  const std::size_t n_layers = params.layers.size();
  if (cache.pre_acts.size() != n_layers || cache.input.rank() != 2 ||
      cache.input.cols() != params.spec.input_dim) {
    throw std::logic_error("backward: cache does not match these parameters");
  }
  const std::size_t batch = cache.input.rows();
  if (dloss_dprob.size() != batch)
    throw shape_error("backward: dloss_dprob length != batch size");
  if (cache.probs.size() != batch)
    throw std::logic_error("backward: cache is stale (probability count mismatch)");

  ParamGrads grads;
  grads.names.resize(params.tensor_count());
  grads.tensors.resize(params.tensor_count());
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    grads.names[i] = params.tensor_name(i);
    grads.tensors[i] = Tensor::zeros_like(params.tensor(i));
  }

  // Output delta: chain through the sigmoid, d prob / d z = p (1 - p).
  Tensor delta({batch, 1});
  for (std::size_t i = 0; i < batch; ++i) {
    const double p = cache.probs[i];
    delta.at(i, 0) = dloss_dprob[i] * p * (1.0 - p);
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    const Tensor& below = l == 0 ? cache.input : cache.activations[l - 1];
    Tensor& dweight = grads.tensors[2 * l];
    Tensor& dbias = grads.tensors[2 * l + 1];
    dweight = matmul_transpose_a(delta, below);  // out x in
    for (std::size_t i = 0; i < delta.rows(); ++i)
      for (std::size_t j = 0; j < delta.cols(); ++j) dbias[j] += delta.at(i, j);

    if (l == 0) break;
    Tensor prev = matmul(delta, params.layers[l].weight);  // batch x in_l
    const Tensor& mask = cache.dropout_masks[l - 1];
    const Tensor& z = cache.pre_acts[l - 1];
    for (std::size_t i = 0; i < prev.size(); ++i)
      prev[i] *= mask[i] * activate_grad(z[i], params.spec.activation, params.spec.leaky_slope);
    delta = std::move(prev);
  }
  return grads;
}

void save_params(const MlpParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  char buf[40];
  out << "hamnn-params v1\n";
  out << "spec input_dim=" << params.spec.input_dim << " hidden=";
  for (std::size_t i = 0; i < params.spec.hidden_dims.size(); ++i)
    out << (i ? "," : "") << params.spec.hidden_dims[i];
  std::snprintf(buf, sizeof buf, "%.17g", params.spec.dropout_rate);
  out << " dropout=" << buf;
  out << " activation=" << activation_token(params.spec.activation);
  std::snprintf(buf, sizeof buf, "%.17g", params.spec.leaky_slope);
  out << " slope=" << buf << "\n";
  out << "tensors " << params.tensor_count() << "\n";
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    const Tensor& t = params.tensor(i);
    out << "tensor " << params.tensor_name(i) << " " << t.rank();
    for (std::size_t d : t.shape()) out << " " << d;
    out << "\n";
    for (std::size_t j = 0; j < t.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", t[j]);
      out << buf << (j + 1 == t.size() ? "\n" : " ");
    }
    if (t.size() == 0) out << "\n";
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

MlpParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "hamnn-params v1")
    throw io_error("'" + path + "': bad header");

  if (!std::getline(in, line) || line.rfind("spec ", 0) != 0)
    throw io_error("'" + path + "': missing spec line");
  LayerSpec spec;
  {
    std::istringstream ls(line.substr(5));
    std::string field;
    while (ls >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw io_error("'" + path + "': bad spec field " + field);
      const std::string key = field.substr(0, eq);
      const std::string val = field.substr(eq + 1);
      if (key == "input_dim") {
        spec.input_dim = std::stoull(val);
      } else if (key == "hidden") {
        spec.hidden_dims.clear();
        std::istringstream hs(val);
        std::string tok;
        while (std::getline(hs, tok, ','))
          if (!tok.empty()) spec.hidden_dims.push_back(std::stoull(tok));
      } else if (key == "dropout") {
        spec.dropout_rate = std::stod(val);
      } else if (key == "activation") {
        spec.activation = activation_from_token(val);
      } else if (key == "slope") {
        spec.leaky_slope = std::stod(val);
      } else {
        throw io_error("'" + path + "': unknown spec field " + key);
      }
    }
  }

  std::size_t n_tensors = 0;
  if (!(in >> line >> n_tensors) || line != "tensors")
    throw io_error("'" + path + "': missing tensor count");

  MlpParams params;
  params.spec = spec;
  params.layers.resize((n_tensors + 1) / 2);
  for (std::size_t i = 0; i < n_tensors; ++i) {
    std::string tag, name;
    std::size_t rank = 0;
    if (!(in >> tag >> name >> rank) || tag != "tensor")
      throw io_error("'" + path + "': bad tensor header");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape)
      if (!(in >> d)) throw io_error("'" + path + "': bad tensor shape");
    Tensor t(shape);
    for (std::size_t j = 0; j < t.size(); ++j)
      if (!(in >> t[j])) throw io_error("'" + path + "': bad tensor value");
    if (name != params.tensor_name(i))
      throw io_error("'" + path + "': unexpected tensor name " + name);
    params.tensor(i) = std::move(t);
  }
  return params;
}

}  // namespace hamnn
