#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "srf/channel.hpp"

namespace srf {

/// One channel condition: profile, delay spread and UE speed.
struct ChannelSetting {
  std::string profile;  // "CDL-A" or "CDL-D"
  double delay_spread_s;
  double velocity_mps;

  std::string label() const;
};

/// CDL-A / CDL-D x {30 ns, 300 ns} x {3 km/h, 30 km/h}.
std::vector<ChannelSetting> default_settings();
// Subset of default_settings() with the given profile.
std::vector<ChannelSetting> settings_for_profile(const std::string& profile);

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct RealizationEntry {
  std::string file;
  std::size_t setting;
  std::size_t index;  // realization number within its setting
  std::uint64_t seed;
};

struct DatasetManifest {
  static constexpr int kSchemaVersion = 1;

  SimConfig base;  // delay spread / velocity / seed are per setting
  std::uint64_t master_seed = 1;
  std::size_t realizations_per_setting = 100;
  std::vector<ChannelSetting> settings;
  std::vector<RealizationEntry> files;
  DatasetSplit split;

  // Config used for one realization (setting fields + derived seed).
  SimConfig config_for(const RealizationEntry& e) const;
};

/// In-memory dataset: realizations in manifest order.
struct Dataset {
  DatasetManifest manifest;
  std::vector<ChannelRealization> realizations;
  std::string manifest_hash;

  // Slots of the given realizations, in order.
  std::vector<const ComplexGrid*> slots(const std::vector<std::size_t>& realization_ids) const;
  // Realization ids whose setting profile matches (all when empty).
  std::vector<std::size_t> filter(const std::vector<std::size_t>& ids, const std::string& profile) const;
};

std::uint64_t realization_seed(std::uint64_t master, std::size_t setting, std::size_t realization);

/// Realization-level split. Each stratum (setting) is shuffled with `seed`
/// and cut into floor-rounded fractions, so a realization's slots never span
/// two splits. Throws ConfigError when a split would be empty.
DatasetSplit split(const std::vector<std::size_t>& strata, double train_fraction, double val_fraction,
                   std::uint64_t seed);

/// Simulates every (setting, realization) pair, writes one SRFD file per
/// realization plus manifest.json (including the split) to out_dir.
/// `jobs` worker threads; output does not depend on it.
DatasetManifest generate_dataset(const std::vector<ChannelSetting>& settings, std::size_t realizations_per_setting,
                                 const SimConfig& base, const std::filesystem::path& out_dir, unsigned jobs = 1);

Dataset load_dataset(const std::filesystem::path& dir);
DatasetManifest read_manifest(const std::filesystem::path& dir);

/// SRFD container: magic, version, K, N_s, slot count, float32 (re, im) pairs.
void write_realization(const std::filesystem::path& path, const ChannelRealization& r);
std::vector<ComplexGrid> read_realization(const std::filesystem::path& path);

}  // namespace srf
