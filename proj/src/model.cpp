#include "srf/model.hpp"

#include <cmath>

#include "srf/binary_io.hpp"
#include "srf/rng.hpp"

namespace srf {

namespace {

constexpr std::array<char, 4> kModelMagic{'S', 'R', 'F', 'N'};

std::size_t dense_out(const ModelConfig& c) { return c.upsample() * c.output_sym * c.head_channels; }

void write_sizes(io::Writer& w, const std::vector<std::size_t>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (auto x : v) w.u32(static_cast<std::uint32_t>(x));
}

std::vector<std::size_t> read_sizes(io::Reader& r) {
  const auto n = r.u32();
  if (n > 64) throw IoError(r.source() + ": implausible list length " + std::to_string(n));
  std::vector<std::size_t> v(n);
  for (auto& x : v) x = r.u32();
  return v;
}

}  // namespace

void ModelConfig::validate() const {
  if (front_channels.size() != 8) {
    throw ConfigError("model needs 8 front conv layers, got " + std::to_string(front_channels.size()));
  }
  if (tail_channels.size() != 3 || tail_channels.back() != 1) {
    throw ConfigError("model needs 3 tail conv layers ending in 1 channel");
  }
  if (kernel % 2 == 0) throw ConfigError("model kernel size " + std::to_string(kernel) + " is even");
  if (input_freq == 0 || input_sym == 0 || output_freq == 0 || output_sym == 0 || gru_hidden == 0 ||
      head_channels == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  for (auto c : front_channels) {
    if (c == 0) throw ConfigError("model channel counts must be positive");
  }
  for (auto c : tail_channels) {
    if (c == 0) throw ConfigError("model channel counts must be positive");
  }
  if (output_freq % input_freq != 0) {
    throw ConfigError("output_freq " + std::to_string(output_freq) + " is not a multiple of input_freq " +
                      std::to_string(input_freq));
  }
}

std::vector<nn::LayerSpec> ModelConfig::layer_specs() const {
  validate();
  std::vector<nn::LayerSpec> specs;
  std::size_t in = 1;
  for (auto c : front_channels) {
    specs.push_back(nn::LayerSpec::conv({in, c, kernel, input_freq, input_sym}, nn::Activation::relu));
    in = c;
  }
  specs.push_back(nn::LayerSpec::bigru({input_freq, front_channels.back() * input_sym, gru_hidden}));
  specs.push_back(nn::LayerSpec::bigru({input_freq, 2 * gru_hidden, gru_hidden}));
  specs.push_back(nn::LayerSpec::dense({2 * gru_hidden, dense_out(*this), input_freq}));
  in = head_channels;
  for (std::size_t i = 0; i < tail_channels.size(); ++i) {
    const auto act = i + 1 < tail_channels.size() ? nn::Activation::relu : nn::Activation::none;
    specs.push_back(nn::LayerSpec::conv({in, tail_channels[i], kernel, output_freq, output_sym}, act));
    in = tail_channels[i];
  }
  return specs;
}

ModelConfig ModelConfig::for_pattern(const PilotPattern& pattern) const {
  ModelConfig c = *this;
  c.input_freq = pattern.pilot_freq();
  c.input_sym = pattern.pilot_sym();
  c.validate();
  return c;
}

nn::FlopCount flop_count(const ModelConfig& config) {
  nn::FlopCount total;
  for (const auto& s : config.layer_specs()) total += nn::flop_count(s);
  return total;
}

std::size_t param_count(const ModelConfig& config) {
  std::size_t total = 0;
  for (const auto& s : config.layer_specs()) total += nn::param_count(s);
  return total;
}

Model Model::build(const ModelConfig& config, std::uint64_t seed) {
  const auto specs = config.layer_specs();
  Model m;
  m.config_ = config;
  std::uint64_t layer = 0;
  for (const auto& s : specs) {
    const auto layer_seed = derive_seed(seed, {layer++});
    switch (s.kind) {
      case nn::LayerKind::conv2d:
        (m.recurrent_.empty() ? m.front_ : m.tail_)
            .emplace_back(std::get<nn::ConvDims>(s.dims), s.activation, layer_seed);
        break;
      case nn::LayerKind::bigru:
        m.recurrent_.emplace_back(std::get<nn::BiGruDims>(s.dims), nn::RecurrenceAxis::frequency, layer_seed);
        break;
      case nn::LayerKind::dense:
        m.head_.emplace_back(std::get<nn::DenseDims>(s.dims), s.activation, layer_seed);
        break;
    }
  }
  return m;
}

Tensor Model::forward(const Tensor& ls_component) const {
  const auto& c = config_;
  if (ls_component.rank() != 2 || ls_component.dim(0) != c.input_freq || ls_component.dim(1) != c.input_sym) {
    throw ContractError("model expects a " + std::to_string(c.input_freq) + "x" + std::to_string(c.input_sym) +
                        " pilot grid, got " + to_string(ls_component.shape()));
  }
  auto x = reshape(scale(ls_component, 1.0 / input_scale_), {1, c.input_freq, c.input_sym});
  for (const auto& layer : front_) x = layer.forward(x);
  x = recurrent_[0].forward(x);  // sequenced along frequency
  x = recurrent_[1].forward(x);
  x = head_[0].forward(x);  // [input_freq x upsample * output_sym * head_channels]
  x = permute(reshape(x, {c.output_freq, c.output_sym, c.head_channels}), {2, 0, 1});
  for (const auto& layer : tail_) x = layer.forward(x);
  return scale(reshape(x, {c.output_freq, c.output_sym}), input_scale_);
}

Tensor Model::predict(const Tensor& ls_component) const {
  NoGradGuard no_grad;
  return forward(ls_component.detach()).detach();
}

ComplexGrid Model::predict_complex(const ComplexGrid& pilot_ls) const {
  return ComplexGrid::from_parts(predict(pilot_ls.real_part()), predict(pilot_ls.imag_part()));
}

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> out;
  auto append = [&out](const auto& layers) {
    for (const auto& l : layers) {
      for (auto& p : l.parameters()) out.push_back(p);
    }
  };
  append(front_);
  append(recurrent_);
  append(head_);
  append(tail_);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.size();
  return n;
}

void Model::set_input_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("input scale must be positive and finite");
  input_scale_ = s;
}

Model Model::clone() const {
  Model m = build(config_, 0);
  m.input_scale_ = input_scale_;
  m.copy_parameters_from(*this);
  return m;
}

void Model::copy_parameters_from(const Model& other) {
  auto dst = parameters();
  const auto src = other.parameters();
  if (dst.size() != src.size()) throw ConfigError("copy_parameters_from: models have different layouts");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].shape() != src[i].shape()) throw ConfigError("copy_parameters_from: parameter shape mismatch");
    std::copy(src[i].data().begin(), src[i].data().end(), dst[i].mutable_data().begin());
  }
  input_scale_ = other.input_scale_;
}

void Model::save(const std::filesystem::path& path) const {
  io::Writer w;
  w.magic(kModelMagic);
  w.u32(kFormatVersion);
  const auto& c = config_;
  for (auto v : {c.input_freq, c.input_sym, c.output_freq, c.output_sym, c.kernel, c.gru_hidden, c.head_channels}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  write_sizes(w, c.front_channels);
  write_sizes(w, c.tail_channels);
  w.f64(input_scale_);
  const auto params = parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    write_sizes(w, p.shape());
    for (double v : p.data()) w.f64(v);
  }
  io::write_file(path, w.bytes());
}

Model Model::load(const std::filesystem::path& path) {
  auto r = io::Reader::from_file(path);
  r.expect_magic(kModelMagic);
  const auto version = r.u32();
  if (version != kFormatVersion) {
    throw IoError(path.string() + ": model format version " + std::to_string(version) + ", expected " +
                  std::to_string(kFormatVersion));
  }
  ModelConfig c;
  for (auto* v : {&c.input_freq, &c.input_sym, &c.output_freq, &c.output_sym, &c.kernel, &c.gru_hidden,
                  &c.head_channels}) {
    *v = r.u32();
  }
  c.front_channels = read_sizes(r);
  c.tail_channels = read_sizes(r);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw IoError(path.string() + ": invalid model config: " + e.what());
  }
  Model m = build(c, 0);
  m.set_input_scale(r.f64());
  auto params = m.parameters();
  const auto count = r.u32();
  if (count != params.size()) {
    throw IoError(path.string() + ": " + std::to_string(count) + " parameter tensors, expected " +
                  std::to_string(params.size()));
  }
  for (auto& p : params) {
    const auto shape = read_sizes(r);
    if (shape != p.shape()) throw IoError(path.string() + ": parameter shape " + to_string(shape) + " mismatch");
    for (auto& v : p.mutable_data()) v = r.f64();
  }
  if (!r.at_end()) throw IoError(path.string() + ": trailing bytes");
  return m;
}

}  // namespace srf
