#include "srf/nn.hpp"

#include <cmath>
#include <random>

#include "srf/rng.hpp"

namespace srf::nn {

namespace {

Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v), true);
}

Tensor glorot_gates(std::size_t hidden, std::size_t cols, std::mt19937_64& rng) {
  // Each of the three stacked gate matrices is its own [hidden x cols] draw.
  std::vector<double> v;
  v.reserve(3 * hidden * cols);
  for (int gate = 0; gate < 3; ++gate) {
    auto block = glorot({hidden, cols}, cols, hidden, rng);
    v.insert(v.end(), block.data().begin(), block.data().end());
  }
  return Tensor({3 * hidden, cols}, std::move(v), true);
}

}  // namespace

std::size_t param_count(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::conv2d: {
      const auto& d = std::get<ConvDims>(spec.dims);
      return d.out_channels * d.in_channels * d.kernel * d.kernel + d.out_channels;
    }
    case LayerKind::dense: {
      const auto& d = std::get<DenseDims>(spec.dims);
      return d.in * d.out + d.out;
    }
    case LayerKind::bigru: {
      const auto& d = std::get<BiGruDims>(spec.dims);
      return 2 * (3 * d.hidden * d.input + 3 * d.hidden * d.hidden + 3 * d.hidden);
    }
  }
  return 0;
}

FlopCount flop_count(const LayerSpec& spec) {
  FlopCount c;
  switch (spec.kind) {
    case LayerKind::conv2d: {
      const auto& d = std::get<ConvDims>(spec.dims);
      c.macs = d.height * d.width * d.in_channels * d.out_channels * d.kernel * d.kernel;
      c.flops = 2 * c.macs;
      break;
    }
    case LayerKind::dense: {
      const auto& d = std::get<DenseDims>(spec.dims);
      c.macs = d.in * d.out * d.applications;
      c.flops = 2 * c.macs;
      break;
    }
    case LayerKind::bigru: {
      const auto& d = std::get<BiGruDims>(spec.dims);
      const std::uint64_t directions = 2;
      c.macs = d.steps * directions * 3 * (d.hidden * d.input + d.hidden * d.hidden);
      c.flops = d.steps * directions * (3 * (d.hidden * d.input + d.hidden * d.hidden + d.hidden) * 2 + 8 * d.hidden);
      break;
    }
  }
  return c;
}

bool compatible(const LayerSpec& a, const LayerSpec& b) {
  auto out_size = [](const LayerSpec& s) -> std::size_t {
    switch (s.kind) {
      case LayerKind::conv2d: {
        const auto& d = std::get<ConvDims>(s.dims);
        return d.out_channels * d.height * d.width;
      }
      case LayerKind::dense: {
        const auto& d = std::get<DenseDims>(s.dims);
        return d.out * d.applications;
      }
      case LayerKind::bigru: {
        const auto& d = std::get<BiGruDims>(s.dims);
        return 2 * d.hidden * d.steps;
      }
    }
    return 0;
  };
  switch (b.kind) {
    case LayerKind::conv2d: {
      const auto& db = std::get<ConvDims>(b.dims);
      if (a.kind == LayerKind::conv2d) {
        const auto& da = std::get<ConvDims>(a.dims);
        return da.out_channels == db.in_channels && da.height == db.height && da.width == db.width;
      }
      return out_size(a) == db.in_channels * db.height * db.width;
    }
    case LayerKind::dense: {
      const auto& db = std::get<DenseDims>(b.dims);
      if (a.kind == LayerKind::bigru) {
        const auto& da = std::get<BiGruDims>(a.dims);
        return 2 * da.hidden == db.in && da.steps == db.applications;
      }
      return out_size(a) == db.in * db.applications;
    }
    case LayerKind::bigru: {
      const auto& db = std::get<BiGruDims>(b.dims);
      if (a.kind == LayerKind::bigru) {
        const auto& da = std::get<BiGruDims>(a.dims);
        return da.steps == db.steps && 2 * da.hidden == db.input;
      }
      if (a.kind == LayerKind::conv2d) {
        const auto& da = std::get<ConvDims>(a.dims);
        // Either axis of the map may be the recurrence axis.
        return (da.height == db.steps && da.out_channels * da.width == db.input) ||
               (da.width == db.steps && da.out_channels * da.height == db.input);
      }
      return out_size(a) == db.steps * db.input;
    }
  }
  return false;
}

std::vector<Tensor> init_params(const LayerSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  switch (spec.kind) {
    case LayerKind::conv2d: {
      const auto& d = std::get<ConvDims>(spec.dims);
      const auto k2 = d.kernel * d.kernel;
      return {glorot({d.out_channels, d.in_channels, d.kernel, d.kernel}, d.in_channels * k2, d.out_channels * k2, rng),
              Tensor::zeros({d.out_channels}, true)};
    }
    case LayerKind::dense: {
      const auto& d = std::get<DenseDims>(spec.dims);
      return {glorot({d.out, d.in}, d.in, d.out, rng), Tensor::zeros({d.out}, true)};
    }
    case LayerKind::bigru: {
      const auto& d = std::get<BiGruDims>(spec.dims);
      std::vector<Tensor> out;
      for (int dir = 0; dir < 2; ++dir) {
        out.push_back(glorot_gates(d.hidden, d.input, rng));
        out.push_back(glorot_gates(d.hidden, d.hidden, rng));
        out.push_back(Tensor::zeros({3 * d.hidden}, true));
      }
      return out;
    }
  }
  return {};
}

Tensor gru_step(const GruDirection& p, const Tensor& x_t, const Tensor& h_prev) {
  const auto h = p.hidden();
  if (x_t.rank() != 1 || x_t.dim(0) != p.input() || h_prev.rank() != 1 || h_prev.dim(0) != h) {
    throw ConfigError("gru_step: x " + to_string(x_t.shape()) + " / h " + to_string(h_prev.shape()) +
                      " incompatible with input " + std::to_string(p.input()) + ", hidden " + std::to_string(h));
  }
  auto gate = [&](std::size_t g, const Tensor& hidden_in) {
    const auto pre = add(add(matvec(slice_rows(p.w, g * h, (g + 1) * h), x_t),
                             matvec(slice_rows(p.u, g * h, (g + 1) * h), hidden_in)),
                         slice_rows(p.b, g * h, (g + 1) * h));
    return pre;
  };
  const auto z = sigmoid(gate(0, h_prev));
  const auto r = sigmoid(gate(1, h_prev));
  const auto cand = tanh(gate(2, mul(r, h_prev)));
  // (1 - z) * h_prev + z * cand
  return add(mul(add_scalar(scale(z, -1.0), 1.0), h_prev), mul(z, cand));
}

Tensor bigru_over_frequency(const GruParams& params, const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("bigru_over_frequency: expected [F x D], got " + to_string(x.shape()));
  const auto fwd = gru_sequence(x, params.forward.w, params.forward.u, params.forward.b, false);
  const auto bwd = gru_sequence(x, params.backward.w, params.backward.u, params.backward.b, true);
  return concat_cols(fwd, bwd);
}

Tensor to_sequence(const Tensor& feature_map, RecurrenceAxis axis) {
  if (feature_map.rank() != 3) throw ShapeError("to_sequence: expected [C x F x S], got " + to_string(feature_map.shape()));
  const auto c = feature_map.dim(0), f = feature_map.dim(1), s = feature_map.dim(2);
  if (axis == RecurrenceAxis::frequency) return reshape(permute(feature_map, {1, 0, 2}), {f, c * s});
  return reshape(permute(feature_map, {2, 0, 1}), {s, c * f});
}

Conv2d::Conv2d(ConvDims dims, Activation activation, std::uint64_t seed)
    : spec_(LayerSpec::conv(dims, activation)) {
  if (dims.kernel % 2 == 0) throw ConfigError("Conv2d: kernel size " + std::to_string(dims.kernel) + " is even");
  auto p = init_params(spec_, seed);
  weight_ = p[0];
  bias_ = p[1];
}

Tensor Conv2d::forward(const Tensor& x) const {
  auto y = conv2d(x, weight_, bias_);
  return spec_.activation == Activation::relu ? relu(y) : y;
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.rank() != 1 || w.rank() != 2 || b.rank() != 1 || w.dim(1) != x.dim(0) || w.dim(0) != b.dim(0)) {
    throw ConfigError("dense: x " + to_string(x.shape()) + " incompatible with W " + to_string(w.shape()) + ", b " +
                      to_string(b.shape()));
  }
  return add(matvec(w, x), b);
}

Dense::Dense(DenseDims dims, Activation activation, std::uint64_t seed)
    : spec_(LayerSpec::dense(dims, activation)) {
  auto p = init_params(spec_, seed);
  weight_ = p[0];
  bias_ = p[1];
}

Tensor Dense::forward(const Tensor& x) const {
  Tensor y;
  if (x.rank() == 1) {
    y = dense(x, weight_, bias_);
  } else {
    if (x.rank() != 2 || x.dim(1) != weight_.dim(1)) {
      throw ConfigError("Dense: input " + to_string(x.shape()) + " incompatible with weight " +
                        to_string(weight_.shape()));
    }
    // Rows are independent applications of the same map.
    y = add_rowwise(matmul(x, transpose(weight_)), bias_);
  }
  return spec_.activation == Activation::relu ? relu(y) : y;
}

BiGru::BiGru(BiGruDims dims, RecurrenceAxis axis, std::uint64_t seed) : spec_(LayerSpec::bigru(dims)), axis_(axis) {
  auto p = init_params(spec_, seed);
  params_.forward = {p[0], p[1], p[2]};
  params_.backward = {p[3], p[4], p[5]};
}

Tensor BiGru::forward(const Tensor& x) const {
  const auto seq = x.rank() == 3 ? to_sequence(x, axis_) : x;
  return bigru_over_frequency(params_, seq);
}

std::vector<Tensor> BiGru::parameters() const {
  return {params_.forward.w, params_.forward.u, params_.forward.b,
          params_.backward.w, params_.backward.u, params_.backward.b};
}

}  // namespace srf::nn
