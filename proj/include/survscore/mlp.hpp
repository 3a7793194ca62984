#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "survscore/optimizer.hpp"
#include "survscore/tape.hpp"

namespace survscore {

enum class Activation { tanh, relu };

Activation activation_from_string(std::string_view name);
std::string to_string(Activation activation);

struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 1;
  Activation activation = Activation::tanh;

  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
  void validate() const;

  nlohmann::json to_json() const;
  static MlpSpec from_json(const nlohmann::json& j);
};

// Slices "<prefix>.W<l>" / "<prefix>.b<l>", row-major weights; the final
// weight matrix is the L2-penalized slice.
void register_mlp_params(const MlpSpec& spec, ParameterStore& store, const std::string& prefix);

// Glorot-uniform weights (+/- sqrt(6 / (fan_in + fan_out))), zero biases.
void init_mlp_params(const MlpSpec& spec, ParameterStore& store, const std::string& prefix,
                     std::uint64_t seed);

template <typename T>
struct MlpWeights {
  const MlpSpec* spec = nullptr;
  std::vector<std::span<const T>> w;  // per layer, row-major (out x in)
  std::vector<std::span<const T>> b;
};

MlpWeights<double> mlp_weights(const MlpSpec& spec, const ParameterStore& store,
                               const std::string& prefix);
MlpWeights<ad::Var> mlp_weights(const MlpSpec& spec, const ParamVars& vars,
                                const std::string& prefix);

// Forward pass for one feature vector. First layer consumes doubles, later
// layers whatever T the weights carry; identical arithmetic for both types.
template <typename T>
std::vector<T> mlp_forward(const MlpWeights<T>& weights, std::span<const double> x) {
  using ad::relu;
  using std::tanh;
  const MlpSpec& spec = *weights.spec;
  if (static_cast<int>(x.size()) != spec.input_dim) {
    throw std::invalid_argument("mlp: feature vector has wrong length");
  }

  std::vector<T> h;
  for (int layer = 0; layer < spec.layer_count(); ++layer) {
    const bool first = layer == 0;
    const int fan_in = first ? spec.input_dim : spec.hidden[static_cast<std::size_t>(layer - 1)];
    const int fan_out = layer < static_cast<int>(spec.hidden.size())
                            ? spec.hidden[static_cast<std::size_t>(layer)]
                            : spec.output_dim;
    const auto& w = weights.w[static_cast<std::size_t>(layer)];
    const auto& b = weights.b[static_cast<std::size_t>(layer)];
    std::vector<T> next;
    next.reserve(static_cast<std::size_t>(fan_out));
    for (int o = 0; o < fan_out; ++o) {
      T acc = b[static_cast<std::size_t>(o)];
      const std::size_t row = static_cast<std::size_t>(o) * static_cast<std::size_t>(fan_in);
      for (int in = 0; in < fan_in; ++in) {
        if (first) {
          acc = acc + w[row + static_cast<std::size_t>(in)] * x[static_cast<std::size_t>(in)];
        } else {
          acc = acc + w[row + static_cast<std::size_t>(in)] * h[static_cast<std::size_t>(in)];
        }
      }
      if (layer < static_cast<int>(spec.hidden.size())) {
        acc = spec.activation == Activation::tanh ? tanh(acc) : relu(acc);
      }
      next.push_back(acc);
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace survscore
