#pragma once

#include <string>
#include <vector>

#include "epinode/tensor.hpp"

namespace epinode {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Weight-collection JSON layout: {"tensors": [{"name", "shape", "data"}, ...]}.
// Doubles are emitted at full precision so a round trip is lossless.
std::string weights_to_json(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> weights_from_json(const std::string& json_text);

}  // namespace epinode
