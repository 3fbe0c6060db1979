#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "srf/ops.hpp"
#include "srf/tensor.hpp"

namespace srf::nn {

enum class LayerKind { conv2d, dense, bigru };
enum class Activation { none, relu, gru_internal };
// Axis of a [C x F x S] feature map that a recurrent layer steps along.
enum class RecurrenceAxis { frequency, time };

struct ConvDims {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 3;
  std::size_t height = 1;  // spatial extent the layer runs at; needed for FLOPs
  std::size_t width = 1;
};

struct DenseDims {
  std::size_t in = 1;
  std::size_t out = 1;
  std::size_t applications = 1;  // rows the same map is applied to
};

struct BiGruDims {
  std::size_t steps = 1;
  std::size_t input = 1;
  std::size_t hidden = 1;
};

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::variant<ConvDims, DenseDims, BiGruDims> dims;
  Activation activation = Activation::none;

  static LayerSpec conv(ConvDims d, Activation act) { return {LayerKind::conv2d, d, act}; }
  static LayerSpec dense(DenseDims d, Activation act = Activation::none) { return {LayerKind::dense, d, act}; }
  static LayerSpec bigru(BiGruDims d) { return {LayerKind::bigru, d, Activation::gru_internal}; }
};

struct FlopCount {
  std::uint64_t macs = 0;
  std::uint64_t flops = 0;

  FlopCount& operator+=(const FlopCount& o) {
    macs += o.macs;
    flops += o.flops;
    return *this;
  }
  double mega_flops() const { return static_cast<double>(flops) / 1e6; }
  bool operator==(const FlopCount&) const = default;
};

std::size_t param_count(const LayerSpec& spec);

/// conv: 2*H*W*Cin*Cout*k^2; dense: 2*in*out*applications;
/// bigru: steps*2*(3*(H*I + H*H + H)*2 + 8*H), the last term counting the
/// three gate activations and five elementwise vector ops of each step.
FlopCount flop_count(const LayerSpec& spec);

// Output of `a` can feed `b` (channel counts, sequence lengths, widths).
bool compatible(const LayerSpec& a, const LayerSpec& b);

/// Glorot-uniform weights (per gate matrix for GRUs), zero biases.
/// Order: conv {w, b}; dense {w, b}; bigru {fw.w, fw.u, fw.b, bw.w, bw.u, bw.b}.
std::vector<Tensor> init_params(const LayerSpec& spec, std::uint64_t seed);

struct GruDirection {
  Tensor w;  // [3H x input], gate rows (z, r, h)
  Tensor u;  // [3H x H]
  Tensor b;  // [3H]

  std::size_t hidden() const { return u.dim(1); }
  std::size_t input() const { return w.dim(1); }
};

struct GruParams {
  GruDirection forward;
  GruDirection backward;
};

/// One GRU update built from primitive ops:
///   z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br),
///   c = tanh(Wh x + Uh (r*h) + bh), h' = (1 - z) * h + z * c.
Tensor gru_step(const GruDirection& params, const Tensor& x_t, const Tensor& h_prev);

/// Row f of the result is [h_fwd(f), h_bwd(f)]; the forward scan runs over
/// rows 0..F-1 and the backward scan over F-1..0, both from zero state.
Tensor bigru_over_frequency(const GruParams& params, const Tensor& x);

// [C x F x S] feature map -> [steps x features] along `axis`.
Tensor to_sequence(const Tensor& feature_map, RecurrenceAxis axis);

class Conv2d {
 public:
  Conv2d(ConvDims dims, Activation activation, std::uint64_t seed);
  Tensor forward(const Tensor& x) const;
  std::vector<Tensor> parameters() const { return {weight_, bias_}; }
  const LayerSpec& spec() const { return spec_; }

 private:
  LayerSpec spec_;
  Tensor weight_;
  Tensor bias_;
};

class Dense {
 public:
  Dense(DenseDims dims, Activation activation, std::uint64_t seed);
  // x: [in] or [rows x in].
  Tensor forward(const Tensor& x) const;
  std::vector<Tensor> parameters() const { return {weight_, bias_}; }
  const LayerSpec& spec() const { return spec_; }

 private:
  LayerSpec spec_;
  Tensor weight_;
  Tensor bias_;
};

/// Dense affine map W x + b for a single vector.
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b);

class BiGru {
 public:
  BiGru(BiGruDims dims, RecurrenceAxis axis, std::uint64_t seed);
  // x: [steps x input] or a [C x F x S] map that is sequenced along axis().
  Tensor forward(const Tensor& x) const;
  std::vector<Tensor> parameters() const;
  const GruParams& params() const { return params_; }
  RecurrenceAxis axis() const { return axis_; }
  const LayerSpec& spec() const { return spec_; }

 private:
  LayerSpec spec_;
  RecurrenceAxis axis_;
  GruParams params_;
};

}  // namespace srf::nn
