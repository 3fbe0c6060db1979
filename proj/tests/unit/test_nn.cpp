#include <gtest/gtest.h>

#include <random>

#include "../common/oracles.hpp"
#include "srf/gradcheck.hpp"
#include "srf/model.hpp"
#include "srf/nn.hpp"

using namespace srf;
using namespace srf::nn;

namespace {

GruDirection random_direction(std::size_t in, std::size_t hid, std::mt19937_64& rng) {
  return {oracle::random_tensor({3 * hid, in}, rng), oracle::random_tensor({3 * hid, hid}, rng),
          oracle::random_tensor({3 * hid}, rng)};
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST(Gru, StepMatchesScalarReference) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t in = 1 + rng() % 5, hid = 1 + rng() % 6;
    const auto p = random_direction(in, hid, rng);
    const auto x = oracle::random_tensor({in}, rng);
    const auto h = oracle::random_tensor({hid}, rng);
    EXPECT_LT(oracle::max_abs_diff(gru_step(p, x, h).data(), oracle::gru_step(p, values(x), values(h))), 1e-12);
  }
}

TEST(Gru, StepRejectsWrongStateSize) {
  std::mt19937_64 rng(32);
  const auto p = random_direction(3, 4, rng);
  EXPECT_THROW(gru_step(p, Tensor::zeros({3}), Tensor::zeros({5})), ConfigError);
}

TEST(Gru, BidirectionalMatchesUnrolledSteps) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t steps = 1 + rng() % 7, in = 1 + rng() % 4, hid = 1 + rng() % 5;
    const GruParams p{random_direction(in, hid, rng), random_direction(in, hid, rng)};
    const auto x = oracle::random_tensor({steps, in}, rng);
    EXPECT_LT(oracle::max_abs_diff(bigru_over_frequency(p, x).data(), oracle::bigru(p, x)), 1e-12);
  }
}

TEST(Gru, ForwardScanIsCausalInFrequency) {
  // Changing the last row leaves every forward state before it untouched.
  std::mt19937_64 rng(34);
  const GruParams p{random_direction(2, 3, rng), random_direction(2, 3, rng)};
  auto x = oracle::random_tensor({6, 2}, rng);
  const auto before = bigru_over_frequency(p, x);
  x.mutable_data()[11] += 0.5;
  const auto after = bigru_over_frequency(p, x);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(before.at(t * 6 + j), after.at(t * 6 + j));
  }
  EXPECT_NE(before.at(0 * 6 + 3), after.at(0 * 6 + 3));  // backward scan does see it
}

TEST(Layers, ToSequenceAlongFrequencyAndTime) {
  std::vector<double> v(2 * 3 * 4);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const Tensor map({2, 3, 4}, v);
  const auto f = to_sequence(map, RecurrenceAxis::frequency);
  EXPECT_EQ(f.shape(), (Shape{3, 8}));
  // row f = [channel 0 symbols, channel 1 symbols]
  EXPECT_EQ(f.at(1 * 8 + 4 + 2), map.at((1 * 3 + 1) * 4 + 2));
  const auto t = to_sequence(map, RecurrenceAxis::time);
  EXPECT_EQ(t.shape(), (Shape{4, 6}));
  EXPECT_EQ(t.at(2 * 6 + 3 + 1), map.at((1 * 3 + 1) * 4 + 2));
}

TEST(Layers, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(35);
  Conv2d conv({2, 3, 3, 4, 3}, Activation::relu, 1);
  Dense dense_layer({5, 4, 3}, Activation::none, 2);
  BiGru gru({4, 3, 2}, RecurrenceAxis::frequency, 3);
  const auto probe_conv = oracle::random_tensor({3, 4, 3}, rng);
  const auto x_conv = oracle::random_tensor({2, 4, 3}, rng, 0.1, 1.0);
  auto conv_loss = [&] { return sum(mul(conv.forward(x_conv), probe_conv)); };
  const auto x_dense = oracle::random_tensor({3, 5}, rng);
  auto dense_loss = [&] { return sum(tanh(dense_layer.forward(x_dense))); };
  const auto x_gru = oracle::random_tensor({4, 3}, rng);
  const auto probe_gru = oracle::random_tensor({4, 4}, rng);
  auto gru_loss = [&] { return sum(mul(gru.forward(x_gru), probe_gru)); };

  for (auto [loss, layer_params] : {std::pair{std::function<Tensor()>(conv_loss), conv.parameters()},
                                    std::pair{std::function<Tensor()>(dense_loss), dense_layer.parameters()},
                                    std::pair{std::function<Tensor()>(gru_loss), gru.parameters()}}) {
    for (auto& p : layer_params) p.set_requires_grad(true);
    EXPECT_LT(finite_diff_check_params(loss, layer_params, 0, 1), 1e-4);
  }
}

TEST(Layers, InitIsSeededAndGlorotBounded) {
  const auto spec = LayerSpec::dense({40, 10});
  const auto a = init_params(spec, 9);
  const auto b = init_params(spec, 9);
  EXPECT_EQ(values(a[0]), values(b[0]));
  EXPECT_NE(values(a[0]), values(init_params(spec, 10)[0]));
  const double bound = std::sqrt(6.0 / 50.0);
  for (double w : a[0].data()) EXPECT_LE(std::abs(w), bound);
  for (double v : a[1].data()) EXPECT_EQ(v, 0.0);
}

TEST(Layers, EvenKernelIsAConfigError) {
  EXPECT_THROW(Conv2d({1, 1, 4, 5, 5}, Activation::relu, 1), ConfigError);
}

TEST(Flops, ConvClosedForm) {
  const auto f = flop_count(LayerSpec::conv({16, 32, 3, 120, 2}, Activation::relu));
  EXPECT_EQ(f.flops, 2ull * 120 * 2 * 16 * 32 * 9);
  EXPECT_EQ(param_count(LayerSpec::conv({16, 32, 3, 120, 2}, Activation::relu)), 16u * 32 * 9 + 32);
}

TEST(Flops, DenseClosedForm) {
  const auto f = flop_count(LayerSpec::dense({192, 112, 120}));
  EXPECT_EQ(f.flops, 2ull * 192 * 112 * 120);
  EXPECT_EQ(param_count(LayerSpec::dense({192, 112, 120})), 192u * 112 + 112);
}

TEST(Flops, BiGruClosedForm) {
  const std::uint64_t steps = 120, in = 32, h = 96;
  const auto f = flop_count(LayerSpec::bigru({steps, in, h}));
  EXPECT_EQ(f.flops, steps * 2 * (3 * (h * in + h * h + h) * 2 + 8 * h));
  EXPECT_EQ(f.macs, steps * 2 * 3 * (h * in + h * h));
  EXPECT_EQ(param_count(LayerSpec::bigru({steps, in, h})), 2 * 3 * (h * in + h * h + h));
}

TEST(Flops, DefaultModelIsInTheHundredsOfMegaFlops) {
  const double mf = flop_count(ModelConfig{}).mega_flops();
  EXPECT_GE(mf, 100.0);
  EXPECT_LE(mf, 2000.0);
}

TEST(Flops, LayerChainIsCompatible) {
  const auto specs = ModelConfig{}.layer_specs();
  for (std::size_t i = 0; i + 1 < specs.size(); ++i) EXPECT_TRUE(compatible(specs[i], specs[i + 1])) << i;
  EXPECT_FALSE(compatible(LayerSpec::conv({1, 8, 3, 4, 4}, Activation::relu),
                          LayerSpec::conv({16, 8, 3, 4, 4}, Activation::relu)));
}
