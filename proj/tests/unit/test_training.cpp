#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <random>

#include "../common/oracles.hpp"
#include "srf/gradcheck.hpp"
#include "srf/binary_io.hpp"
#include "srf/training.hpp"

using namespace srf;

namespace {

ModelConfig small_model() {
  ModelConfig c;
  c.front_channels = {4, 4, 4, 4, 4, 4, 4, 4};
  c.gru_hidden = 8;
  c.head_channels = 2;
  c.tail_channels = {4, 4, 1};
  return c;
}

std::vector<ComplexGrid> small_channels(std::size_t realizations, std::size_t slots, std::uint64_t seed) {
  std::vector<ComplexGrid> out;
  for (std::size_t r = 0; r < realizations; ++r) {
    SimConfig c;
    c.slots_per_realization = slots;
    c.seed = seed + r;
    c.delay_spread_s = r % 2 ? 300e-9 : 30e-9;
    for (auto& s : simulate_realization(r % 3 ? ChannelProfile::cdl_a() : ChannelProfile::cdl_d(), c).slots) {
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<const ComplexGrid*> pointers(const std::vector<ComplexGrid>& v) {
  std::vector<const ComplexGrid*> out;
  for (const auto& g : v) out.push_back(&g);
  return out;
}

}  // namespace

TEST(MseLoss, KnownValues) {
  std::mt19937_64 rng(1);
  const auto t = oracle::random_tensor({240, 14}, rng);
  EXPECT_EQ(mse_loss(t, t).item(), 0.0);
  EXPECT_DOUBLE_EQ(mse_loss(add_scalar(t, 2.0), t).item(), 4.0);
  EXPECT_THROW(mse_loss(t, Tensor::zeros({240, 13})), ContractError);
}

TEST(MseLoss, GradientMatchesClosedFormAndFiniteDifferences) {
  std::mt19937_64 rng(2);
  const auto target = oracle::random_tensor({6, 5}, rng);
  auto pred = oracle::random_tensor({6, 5}, rng).set_requires_grad(true);
  backward(mse_loss(pred, target));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    EXPECT_NEAR(pred.grad()[i], 2.0 * (pred.at(i) - target.at(i)) / 30.0, 1e-15);
  }
  EXPECT_LT(finite_diff_check([&](const Tensor& x) { return mse_loss(x, target); }, pred), 1e-7);
}

TEST(Adam, FirstStepMovesByLearningRateAgainstTheGradientSign) {
  Tensor p({3}, {1.0, 1.0, 1.0}, true);
  auto g = p.mutable_grad();
  g[0] = 0.5;
  g[1] = -3.0;
  g[2] = 1e-3;
  AdamState st;
  std::vector<Tensor> params{p};
  adam_step(params, st, {0.01, 0.9, 0.999, 1e-8});
  EXPECT_NEAR(p.at(0), 1.0 - 0.01, 1e-7);
  EXPECT_NEAR(p.at(1), 1.0 + 0.01, 1e-7);
  EXPECT_NEAR(p.at(2), 1.0 - 0.01, 1e-6);
  EXPECT_EQ(st.step, 1u);
}

TEST(Adam, ZeroGradientDecaysMomentsOnly) {
  Tensor p({2}, {0.3, -0.4}, true);
  std::vector<Tensor> params{p};
  AdamState st;
  p.mutable_grad()[0] = 1.0;
  adam_step(params, st, {});
  const double m0 = st.m[0][0], v0 = st.v[0][0];
  p.zero_grad();
  adam_step(params, st, {0.0, 0.9, 0.999, 1e-8});
  EXPECT_DOUBLE_EQ(st.m[0][0], 0.9 * m0);
  EXPECT_DOUBLE_EQ(st.v[0][0], 0.999 * v0);
  EXPECT_EQ(st.m[0][1], 0.0);
  EXPECT_EQ(p.at(1), -0.4);
}

TEST(Adam, LearningRateZeroIsBitIdentical) {
  auto m = Model::build(small_model(), 3);
  auto params = m.parameters();
  std::vector<std::vector<double>> before;
  for (auto& p : params) {
    before.emplace_back(p.data().begin(), p.data().end());
    for (auto& g : p.mutable_grad()) g = 0.37;
  }
  AdamState st;
  adam_step(params, st, {0.0, 0.9, 0.999, 1e-8});
  for (std::size_t i = 0; i < params.size(); ++i) {
    EXPECT_EQ(std::vector<double>(params[i].data().begin(), params[i].data().end()), before[i]);
  }
}

TEST(Adam, ConvergesOnAQuadratic) {
  // f(x, y) = (x - 3)^2 + 10 (y + 1)^2
  Tensor p({2}, {0.0, 0.0}, true);
  const Tensor target({2}, {3.0, -1.0});
  const Tensor weights({2}, {1.0, 10.0});
  std::vector<Tensor> params{p};
  AdamState st;
  for (int i = 0; i < 500; ++i) {
    p.zero_grad();
    const auto d = sub(p, target);
    backward(sum(mul(weights, mul(d, d))));
    adam_step(params, st, {0.1, 0.9, 0.999, 1e-8});
  }
  EXPECT_NEAR(p.at(0), 3.0, 1e-3);
  EXPECT_NEAR(p.at(1), -1.0, 1e-3);
}

TEST(Samples, NoiseFreeInputEqualsTargetAtPilots) {
  const auto h = small_channels(1, 1, 5)[0];
  const auto p = pilot_pattern("P1");
  std::mt19937_64 rng(1);
  const auto s = make_sample(h, p, {INFINITY}, rng);
  for (std::size_t a = 0; a < p.pilot_freq(); ++a) {
    for (std::size_t b = 0; b < p.pilot_sym(); ++b) {
      EXPECT_EQ(s.input_re.at(a * 2 + b), s.target_re.at(p.freq_indices[a] * 14 + p.sym_indices[b]));
      EXPECT_EQ(s.input_im.at(a * 2 + b), s.target_im.at(p.freq_indices[a] * 14 + p.sym_indices[b]));
    }
  }
}

TEST(Samples, RealAndImaginaryShareOneDraw) {
  const auto h = small_channels(1, 1, 6)[0];
  const auto p = pilot_pattern("P1");
  std::mt19937_64 a(9), b(9);
  const auto s = make_sample(h, p, {10.0}, a);
  const double snr = draw_snr({10.0}, b);
  const auto obs = ls_at_pilots(h, p, snr, b);
  for (std::size_t i = 0; i < obs.ls.size(); ++i) {
    EXPECT_EQ(s.input_re.at(i), obs.ls.values()[i].real());
    EXPECT_EQ(s.input_im.at(i), obs.ls.values()[i].imag());
  }
}

TEST(Samples, MixtureDrawsAreUniform) {
  std::mt19937_64 rng(10);
  std::map<double, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[draw_snr({0, 10, 15}, rng)];
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& [snr, c] : counts) EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 3.0, 0.02) << snr;
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.adam.lr = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.adam.beta2 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.snr_mixture_db.clear();
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, SmokeRunLossMostlyDecreases) {
  const auto tr = small_channels(8, 2, 100);
  const auto va = small_channels(2, 2, 200);
  TrainConfig c;
  c.max_epochs = 5;
  c.patience = 10;
  c.batch_size = 4;
  c.adam.lr = 3e-3;
  c.val_snrs_db = {10};
  const auto r = train(Model::build(small_model(), 1), pointers(tr), pointers(va), c);
  ASSERT_EQ(r.history.size(), 5u);
  int decreases = 0;
  for (std::size_t i = 1; i < r.history.size(); ++i) decreases += r.history[i].train_mse < r.history[i - 1].train_mse;
  EXPECT_GE(decreases, 3);
  EXPECT_LE(r.best_val_nmse_db, r.history.back().val_nmse_db);
  EXPECT_EQ(r.best_val_nmse_db, r.history[r.best_epoch].val_nmse_db);
}

TEST(Train, PatienceZeroStopsAtFirstNonImprovement) {
  const auto tr = small_channels(4, 1, 300);
  const auto va = small_channels(2, 1, 400);
  TrainConfig c;
  c.max_epochs = 30;
  c.patience = 0;
  c.batch_size = 2;
  c.adam.lr = 0.05;  // large enough to stall quickly
  c.val_snrs_db = {0};
  const auto r = train(Model::build(small_model(), 2), pointers(tr), pointers(va), c);
  ASSERT_TRUE(r.early_stopped);
  EXPECT_EQ(r.history.size(), r.best_epoch + 2);
  for (std::size_t i = 1; i + 1 < r.history.size(); ++i) {
    EXPECT_LT(r.history[i].val_nmse_db, r.history[i - 1].val_nmse_db);
  }
}

TEST(Train, DeterministicGivenSeed) {
  const auto tr = small_channels(4, 1, 500);
  const auto va = small_channels(2, 1, 600);
  TrainConfig c;
  c.max_epochs = 2;
  c.batch_size = 3;
  c.val_snrs_db = {5};
  const auto a = train(Model::build(small_model(), 3), pointers(tr), pointers(va), c);
  const auto b = train(Model::build(small_model(), 3), pointers(tr), pointers(va), c);
  const auto pa = a.best.parameters(), pb = b.best.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(oracle::max_abs_diff(pa[i].data(), pb[i].data()), 0.0);
}

TEST(Train, StopHookInterruptsAndCheckpoints) {
  const auto tr = small_channels(4, 2, 700);
  const auto va = small_channels(2, 1, 800);
  TrainConfig c;
  c.max_epochs = 5;
  c.batch_size = 2;
  c.val_snrs_db = {5};
  int polls = 0, checkpoints = 0;
  TrainHooks hooks;
  hooks.should_stop = [&] { return ++polls > 9; };
  hooks.on_checkpoint = [&](const Model&) { ++checkpoints; };
  const auto r = train(Model::build(small_model(), 4), pointers(tr), pointers(va), c, hooks);
  EXPECT_TRUE(r.interrupted);
  EXPECT_EQ(r.history.size(), 1u);
  EXPECT_EQ(checkpoints, 2);  // best after epoch 0, then the interrupted state
}

TEST(Train, DivergenceIsANumericError) {
  const auto tr = small_channels(2, 1, 900);
  const auto va = small_channels(2, 1, 901);
  TrainConfig c;
  c.max_epochs = 3;
  c.batch_size = 1;
  c.adam.lr = 1e300;
  c.val_snrs_db = {5};
  bool checkpointed = false;
  TrainHooks hooks;
  hooks.on_checkpoint = [&](const Model&) { checkpointed = true; };
  EXPECT_THROW(train(Model::build(small_model(), 5), pointers(tr), pointers(va), c, hooks), NumericError);
  EXPECT_TRUE(checkpointed);
}

TEST(Train, PatternMismatchIsAConfigError) {
  const auto tr = small_channels(1, 1, 1);
  TrainConfig c;
  c.pattern = "P4";
  EXPECT_THROW(train(Model::build(small_model(), 1), pointers(tr), pointers(tr), c), ConfigError);
}

TEST(Train, HistoryCsvHasOneRowPerEpoch) {
  const auto path = std::filesystem::temp_directory_path() / "srf_history_test.csv";
  write_history_csv(path, {{0, 0.5, -3.0, 1e-3, 1.0}, {1, 0.4, -4.0, 1e-3, 2.0}});
  const auto text = io::read_text(path);
  EXPECT_EQ(text.rfind("epoch,train_mse,val_nmse_db,lr,wall_seconds\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  std::filesystem::remove(path);
}

TEST(SnrBoost, BudgetOneSingletonPool) {
  const auto r = snr_boost_search({0}, 1, [](const std::vector<double>&) { return 1.0; });
  EXPECT_EQ(r.chosen_set_db, std::vector<double>{0});
}

TEST(SnrBoost, BudgetZeroIsEmptyAndTooLargeIsAnError) {
  const auto r = snr_boost_search({0, 5}, 0, [](const std::vector<double>&) { return 1.0; });
  EXPECT_TRUE(r.chosen_set_db.empty());
  EXPECT_THROW(snr_boost_search({0, 5}, 3, [](const std::vector<double>&) { return 1.0; }), ConfigError);
}

TEST(SnrBoost, GreedyStepBeatsEveryRejectedAlternative) {
  // Score rewards covering both ends of the range.
  auto score = [](const std::vector<double>& set) {
    double s = 0.0;
    for (double test : {-5.0, 0.0, 5.0, 10.0, 15.0, 20.0}) {
      double best = 1e9;
      for (double t : set) best = std::min(best, std::abs(test - t));
      s += best;
    }
    return s;
  };
  const auto r = snr_boost_search({-5, 0, 5, 10, 15, 20}, 3, score);
  ASSERT_EQ(r.chosen_set_db.size(), 3u);
  ASSERT_EQ(r.per_step_scores.size(), 3u);
  for (const auto& step : r.steps) {
    for (const auto& [snr, v] : step.candidates) EXPECT_LE(step.score, v) << snr;
  }
}

TEST(SnrBoost, TiesGoToTheLowerSnr) {
  const auto r = snr_boost_search({10, -5, 5}, 2, [](const std::vector<double>&) { return 0.0; });
  EXPECT_EQ(r.chosen_set_db, (std::vector<double>{-5, 5}));
}
