#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace arms {

enum class Activation { linear, tanh, relu, sigmoid };

Activation parse_activation(std::string_view tag);
std::string_view to_string(Activation activation);

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<float> weights;  ///< outputs x inputs, row-major
  std::vector<float> bias;     ///< outputs
  Activation activation = Activation::tanh;
};

/// Feed-forward network weights consumed by the neural follower and the
/// learned gate.
///
/// On disk:
///
///     layers: d0 d1 ... dn
///     activation: tanh [tag per layer ...]
///     <little-endian float32 payload>
///
/// The payload holds, for each layer in order, its d(i+1) x d(i) weight
/// matrix row-major followed by its d(i+1) bias vector. A single activation
/// tag applies to every layer.
class NeuralPolicyWeights {
 public:
  /// Throws ConfigError when layer dimensions do not chain or a weight is
  /// not finite.
  explicit NeuralPolicyWeights(std::vector<DenseLayer> layers);

  static NeuralPolicyWeights load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t input_dim() const { return layers_.front().inputs; }
  std::size_t output_dim() const { return layers_.back().outputs; }
  std::span<const DenseLayer> layers() const { return layers_; }

  /// Throws ConfigError when `input` does not have input_dim() entries.
  std::vector<double> forward(std::span<const double> input) const;

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace arms
