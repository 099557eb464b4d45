#include "arms/neural.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "arms/errors.hpp"

namespace arms {
namespace {

float from_little_endian(const char* bytes) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(bytes[i]);
  return std::bit_cast<float>(bits);
}

void append_little_endian(std::string& out, float value) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>(bits & 0xffu));
    bits >>= 8;
  }
}

std::string read_header_line(std::istream& in, std::string_view key) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("weights file truncated before '" + std::string(key) + "'");
  if (line.rfind(key, 0) != 0) throw ConfigError("weights file: expected '" + std::string(key) + "', got '" + line + "'");
  return line.substr(key.size());
}

double apply(Activation activation, double x) {
  switch (activation) {
    case Activation::linear:
      return x;
    case Activation::tanh:
      return std::tanh(x);
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
    case Activation::sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

}  // namespace

Activation parse_activation(std::string_view tag) {
  if (tag == "linear") return Activation::linear;
  if (tag == "tanh") return Activation::tanh;
  if (tag == "relu") return Activation::relu;
  if (tag == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown activation '" + std::string(tag) + "'");
}

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::linear:
      return "linear";
    case Activation::tanh:
      return "tanh";
    case Activation::relu:
      return "relu";
    case Activation::sigmoid:
      return "sigmoid";
  }
  return "linear";
}

NeuralPolicyWeights::NeuralPolicyWeights(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    if (layer.inputs == 0 || layer.outputs == 0) throw ConfigError("layer dimensions must be positive");
    if (i > 0 && layers_[i - 1].outputs != layer.inputs) throw ConfigError("layer dimensions do not chain");
    if (layer.weights.size() != layer.inputs * layer.outputs || layer.bias.size() != layer.outputs) {
      throw ConfigError("layer parameter count does not match its dimensions");
    }
    for (float w : layer.weights) {
      if (!std::isfinite(w)) throw ConfigError("non-finite weight");
    }
    for (float b : layer.bias) {
      if (!std::isfinite(b)) throw ConfigError("non-finite bias");
    }
  }
}

NeuralPolicyWeights NeuralPolicyWeights::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open weights file " + path.string());

  std::vector<std::size_t> dims;
  {
    std::istringstream fields(read_header_line(in, "layers:"));
    long long d = 0;
    while (fields >> d) {
      if (d <= 0) throw ConfigError("weights file: layer dimensions must be positive");
      dims.push_back(static_cast<std::size_t>(d));
    }
  }
  if (dims.size() < 2) throw ConfigError("weights file: need at least two layer dimensions");
  const std::size_t layer_count = dims.size() - 1;

  std::vector<Activation> activations;
  {
    std::istringstream fields(read_header_line(in, "activation:"));
    std::string tag;
    while (fields >> tag) activations.push_back(parse_activation(tag));
  }
  if (activations.size() == 1) activations.assign(layer_count, activations.front());
  if (activations.size() != layer_count) throw ConfigError("weights file: activation count does not match layers");

  const std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t expected = 0;
  for (std::size_t i = 0; i < layer_count; ++i) expected += dims[i + 1] * (dims[i] + 1);
  if (payload.size() != expected * 4) {
    throw ConfigError("weights file: expected " + std::to_string(expected) + " floats, found " +
                      std::to_string(payload.size() / 4) + (payload.size() % 4 ? " and a partial value" : ""));
  }

  std::vector<DenseLayer> layers;
  const char* cursor = payload.data();
  for (std::size_t i = 0; i < layer_count; ++i) {
    DenseLayer layer;
    layer.inputs = dims[i];
    layer.outputs = dims[i + 1];
    layer.activation = activations[i];
    layer.weights.resize(layer.inputs * layer.outputs);
    layer.bias.resize(layer.outputs);
    for (float& w : layer.weights) {
      w = from_little_endian(cursor);
      cursor += 4;
    }
    for (float& b : layer.bias) {
      b = from_little_endian(cursor);
      cursor += 4;
    }
    layers.push_back(std::move(layer));
  }
  return NeuralPolicyWeights(std::move(layers));
}

void NeuralPolicyWeights::save(const std::filesystem::path& path) const {
  std::string text = "layers: " + std::to_string(layers_.front().inputs);
  for (const auto& layer : layers_) text += " " + std::to_string(layer.outputs);
  text += "\nactivation:";
  bool uniform = true;
  for (const auto& layer : layers_) uniform = uniform && layer.activation == layers_.front().activation;
  if (uniform) {
    text += " " + std::string(to_string(layers_.front().activation));
  } else {
    for (const auto& layer : layers_) text += " " + std::string(to_string(layer.activation));
  }
  text += "\n";
  for (const auto& layer : layers_) {
    for (float w : layer.weights) append_little_endian(text, w);
    for (float b : layer.bias) append_little_endian(text, b);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::vector<double> NeuralPolicyWeights::forward(std::span<const double> input) const {
  if (input.size() != input_dim()) {
    throw ConfigError("network expects " + std::to_string(input_dim()) + " inputs, got " + std::to_string(input.size()));
  }
  std::vector<double> activations(input.begin(), input.end());
  std::vector<double> next;
  for (const auto& layer : layers_) {
    next.assign(layer.outputs, 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      double sum = layer.bias[o];
      const float* row = layer.weights.data() + o * layer.inputs;
      for (std::size_t k = 0; k < layer.inputs; ++k) sum += static_cast<double>(row[k]) * activations[k];
      next[o] = apply(layer.activation, sum);
    }
    activations.swap(next);
  }
  return activations;
}

}  // namespace arms
