#include "srf/channel.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

namespace srf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct TapRow {
  double delay;
  double power_db;
};

// 3GPP TR 38.901 Table 7.7.1-1 (CDL-A), normalized delays and powers.
constexpr TapRow kCdlA[] = {
    {0.0000, -13.4}, {0.3819, 0.0},   {0.4025, -2.2},  {0.5868, -4.0},  {0.4610, -6.0},  {0.5375, -8.2},
    {0.6708, -9.9},  {0.5750, -10.5}, {0.7618, -7.5},  {1.5375, -15.9}, {1.8978, -6.6},  {2.2242, -16.7},
    {2.1718, -12.4}, {2.4942, -15.2}, {2.5119, -10.8}, {3.0582, -11.3}, {4.0810, -12.7}, {4.4579, -16.2},
    {4.5695, -18.3}, {4.7966, -18.9}, {5.0066, -16.6}, {5.3043, -19.9}, {9.6586, -29.7},
};

// 3GPP TR 38.901 Table 7.7.1-4 (CDL-D): specular LOS ray, then the Laplacian clusters.
constexpr TapRow kCdlDLos = {0.0, -0.2};
constexpr TapRow kCdlD[] = {
    {0.0, -13.5},   {0.035, -18.8}, {0.612, -21.0}, {1.363, -22.8}, {1.405, -17.9}, {1.804, -20.1}, {2.596, -21.9},
    {1.775, -22.9}, {4.042, -27.8}, {7.937, -23.6}, {9.424, -24.8}, {9.708, -30.0}, {12.525, -27.7},
};

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

ChannelProfile from_table(std::string name, std::span<const TapRow> rows) {
  std::vector<TapRow> sorted(rows.begin(), rows.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const TapRow& a, const TapRow& b) { return a.delay < b.delay; });
  ChannelProfile p;
  p.name = std::move(name);
  double total = 0.0;
  for (const auto& r : sorted) total += db_to_linear(r.power_db);
  for (const auto& r : sorted) {
    p.cluster_delays.push_back(r.delay);
    p.cluster_powers.push_back(db_to_linear(r.power_db) / total);
  }
  return p;
}

}  // namespace

void ChannelProfile::validate() const {
  if (cluster_delays.empty() || cluster_delays.size() != cluster_powers.size()) {
    throw ConfigError("channel profile " + name + ": delay/power tables are empty or mismatched");
  }
  if (cluster_delays.front() != 0.0) throw ConfigError("channel profile " + name + ": first delay must be 0");
  if (!std::is_sorted(cluster_delays.begin(), cluster_delays.end())) {
    throw ConfigError("channel profile " + name + ": delays must be ascending");
  }
  double total = 0.0;
  for (double p : cluster_powers) {
    if (p < 0.0) throw ConfigError("channel profile " + name + ": negative cluster power");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("channel profile " + name + ": powers do not sum to 1");
  if (has_los && !(los_k_factor > 0.0)) throw ConfigError("channel profile " + name + ": LOS needs a K-factor");
}

ChannelProfile ChannelProfile::cdl_a() { return from_table("CDL-A", kCdlA); }

ChannelProfile ChannelProfile::cdl_d() {
  auto p = from_table("CDL-D", kCdlD);
  double nlos = 0.0;
  for (const auto& r : kCdlD) nlos += db_to_linear(r.power_db);
  p.has_los = true;
  p.los_k_factor = db_to_linear(kCdlDLos.power_db) / nlos;
  return p;
}

ChannelProfile ChannelProfile::by_name(const std::string& name) {
  if (name == "CDL-A" || name == "A" || name == "cdl-a") return cdl_a();
  if (name == "CDL-D" || name == "D" || name == "cdl-d") return cdl_d();
  throw ConfigError("unknown channel profile '" + name + "' (expected CDL-A or CDL-D)");
}

void SimConfig::validate() const {
  if (!(carrier_hz > 0.0) || subcarriers == 0 || !(subcarrier_spacing_hz > 0.0) || symbols_per_slot == 0 ||
      !(delay_spread_s > 0.0) || velocity_mps < 0.0 || slots_per_realization == 0 || cp_overhead < 0.0) {
    throw ConfigError("simulation config has a non-positive field");
  }
  if (static_cast<double>(subcarriers) * subcarrier_spacing_hz >= 0.1 * carrier_hz) {
    throw ConfigError("simulation bandwidth is not small relative to the carrier");
  }
}

PathState PathState::draw(const ChannelProfile& profile, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  PathState s;
  const auto n = profile.cluster_delays.size();
  s.phase.resize(n);
  s.doppler_cos.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.phase[i] = angle(rng);
    s.doppler_cos[i] = std::cos(angle(rng));
  }
  s.los_phase = angle(rng);
  s.los_doppler_cos = std::cos(angle(rng));
  return s;
}

ComplexGrid freq_response(const ChannelProfile& profile, const SimConfig& config, const PathState& paths,
                          std::size_t slot) {
  const auto n_paths = profile.cluster_delays.size();
  if (paths.phase.size() != n_paths || paths.doppler_cos.size() != n_paths) {
    throw ConfigError("path state does not match profile " + profile.name);
  }
  const auto K = config.subcarriers;
  const auto S = config.symbols_per_slot;
  const double fd = config.max_doppler_hz();
  const double t_sym = config.symbol_duration_s();
  const double nlos_gain = profile.has_los ? std::sqrt(1.0 / (profile.los_k_factor + 1.0)) : 1.0;

  // H = F * T with F[k, n] = exp(-j 2 pi f_k tau_n), T[n, i] = a_n exp(j(phi_n + 2 pi f_d,n t_i)).
  std::vector<cdouble> time_part(n_paths * S);
  std::vector<cdouble> freq_part(K * n_paths);
  for (std::size_t n = 0; n < n_paths; ++n) {
    const double amp = nlos_gain * std::sqrt(profile.cluster_powers[n]);
    const double tau = profile.cluster_delays[n] * config.delay_spread_s;
    for (std::size_t i = 0; i < S; ++i) {
      const double t = static_cast<double>(slot * S + i) * t_sym;
      time_part[n * S + i] = std::polar(amp, paths.phase[n] + kTwoPi * fd * paths.doppler_cos[n] * t);
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double f = static_cast<double>(k) * config.subcarrier_spacing_hz;
      freq_part[k * n_paths + n] = std::polar(1.0, -kTwoPi * f * tau);
    }
  }
  ComplexGrid h(K, S);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t n = 0; n < n_paths; ++n) {
      const cdouble f = freq_part[k * n_paths + n];
      for (std::size_t i = 0; i < S; ++i) h(k, i) += f * time_part[n * S + i];
    }
  }
  if (profile.has_los) {
    // LOS ray at zero delay: flat in frequency.
    const double amp = std::sqrt(profile.los_k_factor / (profile.los_k_factor + 1.0));
    for (std::size_t i = 0; i < S; ++i) {
      const double t = static_cast<double>(slot * S + i) * t_sym;
      const cdouble los = std::polar(amp, paths.los_phase + kTwoPi * fd * paths.los_doppler_cos * t);
      for (std::size_t k = 0; k < K; ++k) h(k, i) += los;
    }
  }
  return h;
}

ChannelRealization simulate_realization(const ChannelProfile& profile, const SimConfig& config) {
  profile.validate();
  config.validate();
  std::mt19937_64 rng(config.seed);
  const auto paths = PathState::draw(profile, rng);
  ChannelRealization r;
  r.config = config;
  r.profile = profile.name;
  r.slots.reserve(config.slots_per_realization);
  double power = 0.0;
  for (std::size_t s = 0; s < config.slots_per_realization; ++s) {
    r.slots.push_back(freq_response(profile, config, paths, s));
    power += r.slots.back().mean_power();
  }
  power /= static_cast<double>(config.slots_per_realization);
  const double g = 1.0 / std::sqrt(power);
  for (auto& slot : r.slots) {
    for (auto& v : slot.values()) v *= g;
  }
  return r;
}

ComplexGrid add_noise(const ComplexGrid& y, double snr_db, std::mt19937_64& rng) {
  if (std::isinf(snr_db) && snr_db > 0) return y;
  const double sigma2 = noise_variance(y.mean_power(), snr_db);
  std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2 / 2.0));
  ComplexGrid out = y;
  for (auto& v : out.values()) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += cdouble(re, im);
  }
  return out;
}

PilotObservation ls_at_pilots(const ComplexGrid& h_true, const PilotPattern& pattern, double snr_db,
                              std::mt19937_64& rng) {
  pattern.validate(h_true.subcarriers(), h_true.symbols());
  const double sigma2 = noise_variance(h_true.mean_power(), snr_db);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise_sd = std::sqrt(sigma2 / 2.0);
  const double q = 1.0 / std::numbers::sqrt2;
  PilotObservation obs{ComplexGrid(pattern.pilot_freq(), pattern.pilot_sym()), sigma2, snr_db};
  for (std::size_t a = 0; a < pattern.pilot_freq(); ++a) {
    for (std::size_t b = 0; b < pattern.pilot_sym(); ++b) {
      const auto bits = rng();
      const cdouble x((bits & 1) ? q : -q, (bits & 2) ? q : -q);
      const double re = gauss(rng);
      const double im = gauss(rng);
      const cdouble h = h_true(pattern.freq_indices[a], pattern.sym_indices[b]);
      // Without noise Y / X is H; skip the division so the estimate is exact.
      obs.ls(a, b) = sigma2 == 0.0 ? h : (h * x + noise_sd * cdouble(re, im)) / x;
    }
  }
  return obs;
}

}  // namespace srf
