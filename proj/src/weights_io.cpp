#include "epinode/weights_io.hpp"

#include <json.hpp>

namespace epinode {

using nlohmann::json;

std::string weights_to_json(const std::vector<NamedTensor>& tensors) {
  json arr = json::array();
  for (const auto& nt : tensors) {
    arr.push_back({{"name", nt.name}, {"shape", nt.value.shape}, {"data", nt.value.data}});
  }
  return json{{"tensors", arr}}.dump();
}

std::vector<NamedTensor> weights_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  if (!j.contains("tensors") || !j["tensors"].is_array())
    throw std::invalid_argument("weights_from_json: missing 'tensors' array");
  std::vector<NamedTensor> out;
  for (const auto& t : j["tensors"]) {
    NamedTensor nt;
    nt.name = t.at("name").get<std::string>();
    auto shape = t.at("shape").get<std::vector<int>>();
    auto data = t.at("data").get<std::vector<double>>();
    nt.value = Tensor(std::move(shape), std::move(data));
    out.push_back(std::move(nt));
  }
  return out;
}

}  // namespace epinode
