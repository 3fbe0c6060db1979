#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "srf/grid.hpp"

namespace srf {

constexpr double kSpeedOfLight = 299792458.0;

inline double kmh_to_mps(double kmh) { return kmh / 3.6; }

/// Cluster delay line reduced to one ray per cluster.
struct ChannelProfile {
  std::string name;
  std::vector<double> cluster_delays;  // normalized, ascending, first 0
  std::vector<double> cluster_powers;  // linear, NLOS part, sums to 1
  bool has_los = false;
  double los_k_factor = 0.0;  // linear LOS / NLOS power ratio

  void validate() const;

  static ChannelProfile cdl_a();
  static ChannelProfile cdl_d();
  static ChannelProfile by_name(const std::string& name);
};

struct SimConfig {
  double carrier_hz = 3.5e9;
  std::size_t subcarriers = 240;
  double subcarrier_spacing_hz = 30e3;
  std::size_t symbols_per_slot = 14;
  double delay_spread_s = 30e-9;
  double velocity_mps = kmh_to_mps(3.0);
  std::size_t slots_per_realization = 100;
  double cp_overhead = 0.07;
  std::uint64_t seed = 1;

  void validate() const;
  double symbol_duration_s() const { return (1.0 / subcarrier_spacing_hz) * (1.0 + cp_overhead); }
  double max_doppler_hz() const { return velocity_mps * carrier_hz / kSpeedOfLight; }
};

/// Per-realization random state; persists across all slots of a realization.
struct PathState {
  std::vector<double> phase;       // phi_n, uniform [0, 2pi)
  std::vector<double> doppler_cos; // cos(theta_n), theta_n uniform [0, 2pi)
  double los_phase = 0.0;
  double los_doppler_cos = 1.0;

  static PathState draw(const ChannelProfile& profile, std::mt19937_64& rng);
};

/// H[k, i] = sum_n sqrt(P_n) exp(j(phi_n + 2 pi f_d,n t_i - 2 pi f_k tau_n)) for
/// slot `slot`, with the LOS ray mixed in by Rician weighting when present.
/// Not power-normalized; see simulate_realization.
ComplexGrid freq_response(const ChannelProfile& profile, const SimConfig& config, const PathState& paths,
                          std::size_t slot);

struct ChannelRealization {
  SimConfig config;
  std::string profile;
  std::vector<ComplexGrid> slots;
};

/// All slots of one realization, scaled so the mean |H|^2 over the
/// realization is 1.
ChannelRealization simulate_realization(const ChannelProfile& profile, const SimConfig& config);

/// Adds CN(0, sigma^2) with sigma^2 = mean|y|^2 / 10^(snr_db / 10).
/// An infinite snr_db returns the grid unchanged.
ComplexGrid add_noise(const ComplexGrid& y, double snr_db, std::mt19937_64& rng);

inline double noise_variance(double signal_power, double snr_db) {
  return std::isinf(snr_db) ? 0.0 : signal_power / std::pow(10.0, snr_db / 10.0);
}

struct PilotObservation {
  ComplexGrid ls;          // pilot_freq x pilot_sym LS estimates Y / X
  double noise_variance;   // sigma^2 of each LS estimate
  double snr_db;
};

/// Transmits unit-modulus QPSK pilots through `h_true`, adds noise at the
/// pilot cells (sigma^2 from the slot's mean channel power) and returns Y / X.
PilotObservation ls_at_pilots(const ComplexGrid& h_true, const PilotPattern& pattern, double snr_db,
                              std::mt19937_64& rng);

}  // namespace srf
