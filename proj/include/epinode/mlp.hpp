#pragma once

#include <string>
#include <vector>

#include "epinode/rng.hpp"
#include "epinode/tape.hpp"
#include "epinode/tensor.hpp"

namespace epinode {

enum class Activation { identity, tanh_fn, sigmoid_fn, softplus_fn };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

// Feed-forward network layout. widths = [in, hidden..., out]; `hidden`
// applies to every layer except the last, which uses `output`.
struct MlpSpec {
  std::vector<int> widths;
  Activation hidden = Activation::tanh_fn;
  Activation output = Activation::identity;

  void validate() const;
  int layers() const { return static_cast<int>(widths.size()) - 1; }
  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }
};

// Fresh weights for `spec`: W_l uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)],
// biases zero. Returned as [W0, b0, W1, b1, ...].
std::vector<Tensor> init_mlp_weights(const MlpSpec& spec, Rng& rng);

// Identity weights for a no-hidden-layer spec (square W = I, b = 0);
// used by debug configurations and tests.
std::vector<Tensor> identity_mlp_weights(const MlpSpec& spec);

// Applies the network to `input`, recording every operation on `tape`.
// `weights` are the node ids of the weight leaves in init order.
NodeId mlp_apply(Tape& tape, const MlpSpec& spec, const std::vector<NodeId>& weights,
                 NodeId input);

}  // namespace epinode
