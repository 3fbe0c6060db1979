#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "srf/channel.hpp"

using namespace srf;

namespace {

ChannelProfile two_tap() {
  ChannelProfile p;
  p.name = "two-tap";
  p.cluster_delays = {0.0, 1.0};
  p.cluster_powers = {0.5, 0.5};
  return p;
}

// |sum h(a) h*(b)| / sqrt(sum |h(a)|^2 sum |h(b)|^2) over the supplied pairs.
template <typename Pairs>
double correlation(const Pairs& pairs) {
  cdouble num{};
  double pa = 0.0, pb = 0.0;
  for (const auto& [a, b] : pairs) {
    num += a * std::conj(b);
    pa += std::norm(a);
    pb += std::norm(b);
  }
  return std::abs(num) / std::sqrt(pa * pb);
}

}  // namespace

TEST(Channel, TwoTapNullLandsOnThePredictedSubcarrier) {
  SimConfig c;
  c.velocity_mps = 0.0;
  const std::size_t k_null = 10;
  c.delay_spread_s = 1.0 / (2.0 * c.subcarrier_spacing_hz * static_cast<double>(k_null));
  PathState paths;
  paths.phase = {0.0, 0.0};
  paths.doppler_cos = {1.0, 1.0};
  const auto h = freq_response(two_tap(), c, paths, 0);
  for (std::size_t i = 0; i < c.symbols_per_slot; ++i) {
    EXPECT_LT(std::abs(h(k_null, i)), 1e-9);
    EXPECT_NEAR(std::abs(h(0, i)), std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(std::abs(h(3 * k_null, i)), 0.0, 1e-9);  // every odd multiple
    EXPECT_NEAR(std::abs(h(2 * k_null, i)), std::sqrt(2.0), 1e-9);
  }
}

TEST(Channel, SingleRayDopplerRotatesAtTheExpectedRate) {
  ChannelProfile p;
  p.name = "one-ray";
  p.cluster_delays = {0.0};
  p.cluster_powers = {1.0};
  SimConfig c;
  c.velocity_mps = kmh_to_mps(120.0);
  PathState paths{{0.3}, {1.0}};
  const auto h = freq_response(p, c, paths, 2);
  const double dphi = 2.0 * std::numbers::pi * c.max_doppler_hz() * c.symbol_duration_s();
  for (std::size_t i = 0; i + 1 < c.symbols_per_slot; ++i) {
    const double step = std::arg(h(5, i + 1) / h(5, i));
    EXPECT_NEAR(step, dphi, 1e-9);
  }
}

TEST(Channel, ProfilesAreNormalizedAndSorted) {
  for (const auto& p : {ChannelProfile::cdl_a(), ChannelProfile::cdl_d()}) {
    EXPECT_NO_THROW(p.validate());
  }
  EXPECT_EQ(ChannelProfile::cdl_a().cluster_delays.size(), 23u);
  EXPECT_EQ(ChannelProfile::cdl_d().cluster_delays.size(), 13u);
  EXPECT_TRUE(ChannelProfile::cdl_d().has_los);
  EXPECT_FALSE(ChannelProfile::cdl_a().has_los);
  EXPECT_THROW(ChannelProfile::by_name("CDL-Z"), ConfigError);
}

TEST(Channel, RealizationHasUnitMeanPower) {
  SimConfig c;
  c.slots_per_realization = 5;
  c.seed = 17;
  const auto r = simulate_realization(ChannelProfile::cdl_a(), c);
  double power = 0.0;
  for (const auto& s : r.slots) power += s.mean_power();
  EXPECT_NEAR(power / 5.0, 1.0, 1e-12);
}

TEST(Channel, SameSeedSameChannel) {
  SimConfig c;
  c.slots_per_realization = 2;
  c.seed = 99;
  const auto a = simulate_realization(ChannelProfile::cdl_d(), c);
  const auto b = simulate_realization(ChannelProfile::cdl_d(), c);
  EXPECT_EQ(a.slots[1].values(), b.slots[1].values());
  c.seed = 100;
  EXPECT_NE(simulate_realization(ChannelProfile::cdl_d(), c).slots[1].values(), a.slots[1].values());
}

TEST(Channel, LargerDelaySpreadDecorrelatesFaster) {
  std::vector<std::pair<cdouble, cdouble>> narrow, wide;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SimConfig c;
    c.slots_per_realization = 1;
    c.seed = seed;
    c.delay_spread_s = 30e-9;
    const auto a = simulate_realization(ChannelProfile::cdl_a(), c).slots[0];
    c.delay_spread_s = 300e-9;
    const auto b = simulate_realization(ChannelProfile::cdl_a(), c).slots[0];
    for (std::size_t k = 0; k + 24 < 240; ++k) {
      narrow.emplace_back(a(k, 0), a(k + 24, 0));
      wide.emplace_back(b(k, 0), b(k + 24, 0));
    }
  }
  EXPECT_GT(correlation(narrow), correlation(wide) + 0.2);
}

TEST(Channel, HigherSpeedDecorrelatesFaster) {
  std::vector<std::pair<cdouble, cdouble>> slow, fast;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SimConfig c;
    c.slots_per_realization = 11;
    c.seed = seed;
    c.velocity_mps = kmh_to_mps(3.0);
    const auto a = simulate_realization(ChannelProfile::cdl_a(), c);
    c.velocity_mps = kmh_to_mps(30.0);
    const auto b = simulate_realization(ChannelProfile::cdl_a(), c);
    for (std::size_t k = 0; k < 240; k += 8) {
      slow.emplace_back(a.slots[0](k, 0), a.slots[10](k, 0));
      fast.emplace_back(b.slots[0](k, 0), b.slots[10](k, 0));
    }
  }
  EXPECT_GT(correlation(slow), correlation(fast) + 0.2);
}

TEST(Channel, LsNoiseHasTheRequestedVariance) {
  ComplexGrid h(240, 14, cdouble(0.6, -0.8));  // unit power
  const auto p = pilot_pattern("P1");
  std::mt19937_64 rng(4);
  double err = 0.0;
  std::size_t n = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto obs = ls_at_pilots(h, p, 10.0, rng);
    EXPECT_DOUBLE_EQ(obs.noise_variance, 0.1);
    for (const auto& v : obs.ls.values()) {
      err += std::norm(v - h(0, 0));
      ++n;
    }
  }
  EXPECT_NEAR(err / static_cast<double>(n), 0.1, 0.003);
}

TEST(Channel, NoiseFreeLsIsExact) {
  SimConfig c;
  c.slots_per_realization = 1;
  const auto h = simulate_realization(ChannelProfile::cdl_a(), c).slots[0];
  std::mt19937_64 rng(1);
  const auto p = pilot_pattern("P4");
  const auto obs = ls_at_pilots(h, p, INFINITY, rng);
  EXPECT_EQ(obs.ls.values(), p.gather(h).values());
  EXPECT_EQ(obs.noise_variance, 0.0);
}

TEST(Channel, AddNoiseMatchesSnr) {
  ComplexGrid y(240, 14, cdouble(1.0, 0.0));
  std::mt19937_64 rng(8);
  const auto noisy = add_noise(y, 0.0, rng);
  double err = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) err += std::norm(noisy.values()[i] - y.values()[i]);
  EXPECT_NEAR(err / static_cast<double>(y.size()), 1.0, 0.06);
  EXPECT_EQ(add_noise(y, INFINITY, rng).values(), y.values());
}

TEST(Channel, ConfigValidation) {
  SimConfig c;
  c.subcarriers = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  SimConfig d;
  EXPECT_NEAR(d.symbol_duration_s(), 1.07 / 30e3, 1e-15);
  EXPECT_NEAR(SimConfig{}.max_doppler_hz(), kmh_to_mps(3.0) * 3.5e9 / kSpeedOfLight, 1e-12);
}

TEST(PilotPatterns, SizesMatchTheirLayouts) {
  const std::pair<const char*, std::pair<std::size_t, std::size_t>> want[] = {
      {"P1", {120, 2}}, {"P2", {60, 2}}, {"P3", {120, 1}}, {"P4", {60, 4}}, {"P5", {80, 2}}};
  for (const auto& [name, dims] : want) {
    const auto p = pilot_pattern(name);
    EXPECT_EQ(p.pilot_freq(), dims.first) << name;
    EXPECT_EQ(p.pilot_sym(), dims.second) << name;
  }
  EXPECT_THROW(pilot_pattern("P9"), ConfigError);
  EXPECT_THROW(pilot_pattern("P1", 240, 6), ConfigError);
}
