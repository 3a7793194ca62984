#include "survscore/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "survscore/util.hpp"

namespace survscore {

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation: " + std::string(name));
}

std::string to_string(Activation activation) {
  return activation == Activation::tanh ? "tanh" : "relu";
}

void MlpSpec::validate() const {
  if (input_dim < 0) throw std::invalid_argument("mlp: input_dim must be >= 0");
  if (output_dim < 1) throw std::invalid_argument("mlp: output_dim must be >= 1");
  for (int w : hidden) {
    if (w < 1) throw std::invalid_argument("mlp: hidden widths must be >= 1");
  }
}

nlohmann::json MlpSpec::to_json() const {
  return {{"input_dim", input_dim},
          {"hidden", hidden},
          {"output_dim", output_dim},
          {"activation", to_string(activation)}};
}

MlpSpec MlpSpec::from_json(const nlohmann::json& j) {
  MlpSpec spec;
  spec.input_dim = j.at("input_dim").get<int>();
  spec.hidden = j.at("hidden").get<std::vector<int>>();
  spec.output_dim = j.at("output_dim").get<int>();
  spec.activation = activation_from_string(j.at("activation").get<std::string>());
  spec.validate();
  return spec;
}

namespace {

struct LayerShape {
  int fan_in = 0;
  int fan_out = 0;
};

std::vector<LayerShape> layer_shapes(const MlpSpec& spec) {
  std::vector<LayerShape> shapes;
  int fan_in = spec.input_dim;
  for (int w : spec.hidden) {
    shapes.push_back({fan_in, w});
    fan_in = w;
  }
  shapes.push_back({fan_in, spec.output_dim});
  return shapes;
}

}  // namespace

void register_mlp_params(const MlpSpec& spec, ParameterStore& store, const std::string& prefix) {
  spec.validate();
  const auto shapes = layer_shapes(spec);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const bool final_layer = l + 1 == shapes.size();
    store.add_slice(prefix + ".W" + std::to_string(l), shapes[l].fan_in * shapes[l].fan_out,
                    final_layer);
    store.add_slice(prefix + ".b" + std::to_string(l), shapes[l].fan_out, false);
  }
}

void init_mlp_params(const MlpSpec& spec, ParameterStore& store, const std::string& prefix,
                     std::uint64_t seed) {
  const auto shapes = layer_shapes(spec);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    auto w = store.slice(prefix + ".W" + std::to_string(l));
    const double bound =
        std::sqrt(6.0 / std::max(1, shapes[l].fan_in + shapes[l].fan_out));
    std::uniform_real_distribution<double> unif(-bound, bound);
    for (double& v : w) v = unif(rng);
    auto b = store.slice(prefix + ".b" + std::to_string(l));
    for (double& v : b) v = 0.0;
  }
}

MlpWeights<double> mlp_weights(const MlpSpec& spec, const ParameterStore& store,
                               const std::string& prefix) {
  MlpWeights<double> out;
  out.spec = &spec;
  for (int l = 0; l < spec.layer_count(); ++l) {
    out.w.push_back(store.slice(prefix + ".W" + std::to_string(l)));
    out.b.push_back(store.slice(prefix + ".b" + std::to_string(l)));
  }
  return out;
}

MlpWeights<ad::Var> mlp_weights(const MlpSpec& spec, const ParamVars& vars,
                                const std::string& prefix) {
  MlpWeights<ad::Var> out;
  out.spec = &spec;
  for (int l = 0; l < spec.layer_count(); ++l) {
    out.w.push_back(vars.slice(prefix + ".W" + std::to_string(l)));
    out.b.push_back(vars.slice(prefix + ".b" + std::to_string(l)));
  }
  return out;
}

}  // namespace survscore
