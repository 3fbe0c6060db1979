#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "srf/grid.hpp"
#include "srf/nn.hpp"

namespace srf {

/// Layer widths of the estimator. The topology is fixed: eight "same"
/// conv layers on the pilot grid, two bidirectional GRUs stepping along
/// frequency, a per-frequency dense head, three conv layers on the full grid.
struct ModelConfig {
  std::size_t input_freq = 120;
  std::size_t input_sym = 2;
  std::size_t output_freq = 240;
  std::size_t output_sym = 14;
  std::vector<std::size_t> front_channels{16, 32, 32, 64, 64, 32, 32, 16};
  std::size_t kernel = 3;
  std::size_t gru_hidden = 96;
  std::size_t head_channels = 4;
  std::vector<std::size_t> tail_channels{16, 8, 1};

  void validate() const;
  // Frequency rows the dense head emits per GRU step.
  std::size_t upsample() const { return output_freq / input_freq; }
  // Specs of every layer in forward order, dimensioned for FLOP counting.
  std::vector<nn::LayerSpec> layer_specs() const;
  // Same widths with input dims matching `pattern`.
  ModelConfig for_pattern(const PilotPattern& pattern) const;

  bool operator==(const ModelConfig&) const = default;
};

nn::FlopCount flop_count(const ModelConfig& config);
std::size_t param_count(const ModelConfig& config);

class Model {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  static Model build(const ModelConfig& config, std::uint64_t seed);

  /// Differentiable forward pass for one real component:
  /// [input_freq x input_sym] -> [output_freq x output_sym].
  Tensor forward(const Tensor& ls_component) const;
  /// Inference: no graph is recorded and nothing is carried between calls.
  Tensor predict(const Tensor& ls_component) const;
  /// Real and imaginary parts through the same network, reassembled.
  ComplexGrid predict_complex(const ComplexGrid& pilot_ls) const;

  const ModelConfig& config() const { return config_; }
  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;

  // Inputs are divided by this and outputs multiplied by it.
  double input_scale() const { return input_scale_; }
  void set_input_scale(double s);

  // Deep copy of parameters and config.
  Model clone() const;
  // Overwrites parameter values (shapes must match).
  void copy_parameters_from(const Model& other);

  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

 private:
  Model() = default;

  ModelConfig config_;
  double input_scale_ = 1.0;
  std::vector<nn::Conv2d> front_;
  std::vector<nn::BiGru> recurrent_;
  std::vector<nn::Dense> head_;
  std::vector<nn::Conv2d> tail_;
};

}  // namespace srf
