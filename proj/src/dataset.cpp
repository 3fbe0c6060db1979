#include "srf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "srf/binary_io.hpp"
#include "srf/json_io.hpp"
#include "srf/parallel.hpp"
#include "srf/rng.hpp"

namespace srf {

namespace {

constexpr std::array<char, 4> kRealizationMagic{'S', 'R', 'F', 'D'};
constexpr std::uint32_t kRealizationVersion = 1;

}  // namespace

std::string ChannelSetting::label() const {
  std::ostringstream os;
  os << profile << "_" << std::lround(delay_spread_s * 1e9) << "ns_" << std::lround(velocity_mps * 3.6) << "kmh";
  return os.str();
}

std::vector<ChannelSetting> default_settings() {
  std::vector<ChannelSetting> out;
  for (const char* profile : {"CDL-A", "CDL-D"}) {
    for (double ds : {30e-9, 300e-9}) {
      for (double kmh : {3.0, 30.0}) out.push_back({profile, ds, kmh_to_mps(kmh)});
    }
  }
  return out;
}

std::vector<ChannelSetting> settings_for_profile(const std::string& profile) {
  std::vector<ChannelSetting> out;
  for (auto& s : default_settings()) {
    if (s.profile == profile) out.push_back(s);
  }
  return out;
}

SimConfig DatasetManifest::config_for(const RealizationEntry& e) const {
  SimConfig c = base;
  const auto& s = settings.at(e.setting);
  c.delay_spread_s = s.delay_spread_s;
  c.velocity_mps = s.velocity_mps;
  c.seed = e.seed;
  return c;
}

std::vector<const ComplexGrid*> Dataset::slots(const std::vector<std::size_t>& realization_ids) const {
  std::vector<const ComplexGrid*> out;
  for (auto id : realization_ids) {
    for (const auto& g : realizations.at(id).slots) out.push_back(&g);
  }
  return out;
}

std::vector<std::size_t> Dataset::filter(const std::vector<std::size_t>& ids, const std::string& profile) const {
  if (profile.empty()) return ids;
  const auto wanted = ChannelProfile::by_name(profile).name;
  std::vector<std::size_t> out;
  for (auto id : ids) {
    if (manifest.settings.at(manifest.files.at(id).setting).profile == wanted) out.push_back(id);
  }
  return out;
}

std::uint64_t realization_seed(std::uint64_t master, std::size_t setting, std::size_t realization) {
  return derive_seed(master, {0x5e771e6ULL, setting, realization});
}

DatasetSplit split(const std::vector<std::size_t>& strata, double train_fraction, double val_fraction,
                   std::uint64_t seed) {
  const double test_fraction = 1.0 - train_fraction - val_fraction;
  if (train_fraction <= 0.0 || val_fraction <= 0.0 || test_fraction <= 1e-12) {
    throw ConfigError("split fractions must be positive and sum to 1");
  }
  std::vector<std::size_t> labels = strata;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

  DatasetSplit out;
  for (auto label : labels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < strata.size(); ++i) {
      if (strata[i] == label) members.push_back(i);
    }
    std::mt19937_64 rng(derive_seed(seed, {0x5b117ULL, label}));
    std::shuffle(members.begin(), members.end(), rng);
    const auto n = members.size();
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
    if (n_train + n_val >= n) {
      throw ConfigError("stratum " + std::to_string(label) + " has too few realizations (" + std::to_string(n) +
                        ") for non-empty train/val/test splits");
    }
    out.train.insert(out.train.end(), members.begin(), members.begin() + n_train);
    out.val.insert(out.val.end(), members.begin() + n_train, members.begin() + n_train + n_val);
    out.test.insert(out.test.end(), members.begin() + n_train + n_val, members.end());
  }
  if (out.train.empty() || out.val.empty() || out.test.empty()) {
    throw ConfigError("too few realizations for non-empty train/val/test splits");
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

void write_realization(const std::filesystem::path& path, const ChannelRealization& r) {
  if (r.slots.empty()) throw ConfigError("realization without slots");
  io::Writer w;
  w.magic(kRealizationMagic);
  w.u32(kRealizationVersion);
  w.u32(static_cast<std::uint32_t>(r.slots.front().subcarriers()));
  w.u32(static_cast<std::uint32_t>(r.slots.front().symbols()));
  w.u32(static_cast<std::uint32_t>(r.slots.size()));
  for (const auto& g : r.slots) {
    for (const auto& v : g.values()) {
      w.f32(static_cast<float>(v.real()));
      w.f32(static_cast<float>(v.imag()));
    }
  }
  io::write_file(path, w.bytes());
}

std::vector<ComplexGrid> read_realization(const std::filesystem::path& path) {
  auto r = io::Reader::from_file(path);
  r.expect_magic(kRealizationMagic);
  const auto version = r.u32();
  if (version != kRealizationVersion) {
    throw IoError(path.string() + ": realization format version " + std::to_string(version) + " is not supported");
  }
  const auto k = r.u32(), ns = r.u32(), count = r.u32();
  std::vector<ComplexGrid> slots;
  slots.reserve(count);
  for (std::uint32_t s = 0; s < count; ++s) {
    std::vector<cdouble> v(static_cast<std::size_t>(k) * ns);
    for (auto& c : v) {
      const float re = r.f32();
      const float im = r.f32();
      c = {re, im};
    }
    slots.emplace_back(k, ns, std::move(v));
  }
  if (!r.at_end()) throw IoError(path.string() + ": trailing bytes after " + std::to_string(count) + " slots");
  return slots;
}

DatasetManifest generate_dataset(const std::vector<ChannelSetting>& settings, std::size_t realizations_per_setting,
                                 const SimConfig& base, const std::filesystem::path& out_dir, unsigned jobs) {
  if (settings.empty() || realizations_per_setting == 0) throw ConfigError("dataset needs settings and realizations");
  base.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  DatasetManifest m;
  m.base = base;
  m.master_seed = base.seed;
  m.realizations_per_setting = realizations_per_setting;
  m.settings = settings;
  std::vector<std::size_t> strata;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    for (std::size_t r = 0; r < realizations_per_setting; ++r) {
      char name[64];
      std::snprintf(name, sizeof(name), "r%02zu_%04zu.srfd", s, r);
      m.files.push_back({name, s, r, realization_seed(base.seed, s, r)});
      strata.push_back(s);
    }
  }
  m.split = split(strata, 0.8, 0.1, base.seed);

  parallel_for(m.files.size(), jobs, [&](std::size_t i) {
    const auto& e = m.files[i];
    const auto profile = ChannelProfile::by_name(settings[e.setting].profile);
    write_realization(out_dir / e.file, simulate_realization(profile, m.config_for(e)));
  });
  io::write_text(out_dir / "manifest.json", json(m).dump(2) + "\n");
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& dir) {
  const auto text = io::read_text(dir / "manifest.json");
  try {
    return json::parse(text).get<DatasetManifest>();
  } catch (const json::exception& e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset d;
  d.manifest = read_manifest(dir);
  d.manifest_hash = io::file_hash(dir / "manifest.json");
  d.realizations.resize(d.manifest.files.size());
  for (std::size_t i = 0; i < d.manifest.files.size(); ++i) {
    const auto& e = d.manifest.files[i];
    auto& r = d.realizations[i];
    r.config = d.manifest.config_for(e);
    r.profile = d.manifest.settings.at(e.setting).profile;
    r.slots = read_realization(dir / e.file);
    if (r.slots.size() != r.config.slots_per_realization) {
      throw IoError((dir / e.file).string() + ": " + std::to_string(r.slots.size()) + " slots, manifest says " +
                    std::to_string(r.config.slots_per_realization));
    }
  }
  return d;
}

}  // namespace srf
