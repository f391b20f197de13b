#include "epinode/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace epinode {

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh_fn;
  if (s == "sigmoid") return Activation::sigmoid_fn;
  if (s == "softplus") return Activation::softplus_fn;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh_fn: return "tanh";
    case Activation::sigmoid_fn: return "sigmoid";
    case Activation::softplus_fn: return "softplus";
  }
  return "?";
}

void MlpSpec::validate() const {
  if (widths.size() < 2)
    throw std::invalid_argument("MlpSpec: needs at least input and output widths");
  for (size_t i = 0; i < widths.size(); ++i)
    if (widths[i] < 1)
      throw std::invalid_argument("MlpSpec: width " + std::to_string(widths[i]) +
                                  " at position " + std::to_string(i) + " is not positive");
}

std::vector<Tensor> init_mlp_weights(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<Tensor> out;
  for (int l = 0; l < spec.layers(); ++l) {
    int fan_in = spec.widths[l];
    int fan_out = spec.widths[l + 1];
    double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor w = Tensor::zeros({fan_out, fan_in});
    for (double& v : w.data) v = rng.uniform(-s, s);
    out.push_back(std::move(w));
    out.push_back(Tensor::zeros({fan_out}));
  }
  return out;
}

std::vector<Tensor> identity_mlp_weights(const MlpSpec& spec) {
  spec.validate();
  std::vector<Tensor> out;
  for (int l = 0; l < spec.layers(); ++l) {
    int fan_in = spec.widths[l];
    int fan_out = spec.widths[l + 1];
    if (fan_in != fan_out)
      throw std::invalid_argument("identity_mlp_weights: layer " + std::to_string(l) +
                                  " is not square");
    Tensor w = Tensor::zeros({fan_out, fan_in});
    for (int i = 0; i < fan_out; ++i) w.data[static_cast<size_t>(i) * fan_in + i] = 1.0;
    out.push_back(std::move(w));
    out.push_back(Tensor::zeros({fan_out}));
  }
  return out;
}

namespace {
NodeId apply_activation(Tape& tape, Activation a, NodeId x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::tanh_fn: return tape.tanh(x);
    case Activation::sigmoid_fn: return tape.sigmoid(x);
    case Activation::softplus_fn: return tape.softplus(x);
  }
  return x;
}
}  // namespace

NodeId mlp_apply(Tape& tape, const MlpSpec& spec, const std::vector<NodeId>& weights,
                 NodeId input) {
  spec.validate();
  if (static_cast<int>(weights.size()) != 2 * spec.layers())
    throw std::invalid_argument("mlp_apply: expected " + std::to_string(2 * spec.layers()) +
                                " weight tensors, got " + std::to_string(weights.size()));
  if (tape.length(input) != spec.input_width())
    throw std::invalid_argument("mlp_apply: input length " +
                                std::to_string(tape.length(input)) +
                                " does not match first layer width " +
                                std::to_string(spec.input_width()));
  NodeId x = input;
  for (int l = 0; l < spec.layers(); ++l) {
    NodeId w = weights[2 * l];
    NodeId b = weights[2 * l + 1];
    if (tape.length(w) != spec.widths[l] * spec.widths[l + 1] ||
        tape.length(b) != spec.widths[l + 1])
      throw std::invalid_argument("mlp_apply: weight shape mismatch at layer " +
                                  std::to_string(l));
    x = tape.add(tape.matvec(w, x), b);
    x = apply_activation(tape, l + 1 == spec.layers() ? spec.output : spec.hidden, x);
  }
  return x;
}

}  // namespace epinode
