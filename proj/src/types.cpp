#include "a2lc/types.hpp"

namespace a2lc {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kGelu: return "gelu";
    case Activation::kMish: return "mish";
  }
  return "relu";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "gelu") return Activation::kGelu;
  if (name == "mish") return Activation::kMish;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

}  // namespace a2lc
