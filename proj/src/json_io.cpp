#include "srf/json_io.hpp"

namespace srf {

namespace {

template <typename T>
void maybe_get(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

}  // namespace

void to_json(json& j, const SimConfig& c) {
  j = json{{"carrier_hz", c.carrier_hz},
           {"subcarriers", c.subcarriers},
           {"subcarrier_spacing_hz", c.subcarrier_spacing_hz},
           {"symbols_per_slot", c.symbols_per_slot},
           {"delay_spread_s", c.delay_spread_s},
           {"velocity_mps", c.velocity_mps},
           {"slots_per_realization", c.slots_per_realization},
           {"cp_overhead", c.cp_overhead},
           {"seed", c.seed}};
}

void from_json(const json& j, SimConfig& c) {
  maybe_get(j, "carrier_hz", c.carrier_hz);
  maybe_get(j, "subcarriers", c.subcarriers);
  maybe_get(j, "subcarrier_spacing_hz", c.subcarrier_spacing_hz);
  maybe_get(j, "symbols_per_slot", c.symbols_per_slot);
  maybe_get(j, "delay_spread_s", c.delay_spread_s);
  maybe_get(j, "velocity_mps", c.velocity_mps);
  maybe_get(j, "slots_per_realization", c.slots_per_realization);
  maybe_get(j, "cp_overhead", c.cp_overhead);
  maybe_get(j, "seed", c.seed);
}

void to_json(json& j, const ChannelSetting& s) {
  j = json{{"profile", s.profile}, {"delay_spread_s", s.delay_spread_s}, {"velocity_mps", s.velocity_mps}};
}

void from_json(const json& j, ChannelSetting& s) {
  j.at("profile").get_to(s.profile);
  j.at("delay_spread_s").get_to(s.delay_spread_s);
  j.at("velocity_mps").get_to(s.velocity_mps);
}

void to_json(json& j, const PilotPattern& p) {
  j = json{{"name", p.name}, {"freq_indices", p.freq_indices}, {"sym_indices", p.sym_indices}};
}

void from_json(const json& j, PilotPattern& p) {
  j.at("name").get_to(p.name);
  j.at("freq_indices").get_to(p.freq_indices);
  j.at("sym_indices").get_to(p.sym_indices);
}

void to_json(json& j, const DatasetManifest& m) {
  json files = json::array();
  for (const auto& f : m.files) {
    files.push_back({{"file", f.file}, {"setting", f.setting}, {"realization", f.index}, {"seed", f.seed}});
  }
  json patterns = json::array();
  for (const auto& name : pilot_pattern_names()) {
    patterns.push_back(pilot_pattern(name, m.base.subcarriers, m.base.symbols_per_slot));
  }
  j = json{{"schema_version", DatasetManifest::kSchemaVersion},
           {"sim_config", m.base},
           {"master_seed", m.master_seed},
           {"realizations_per_setting", m.realizations_per_setting},
           {"settings", m.settings},
           {"files", files},
           {"split", {{"train", m.split.train}, {"val", m.split.val}, {"test", m.split.test}}},
           {"pilot_patterns", patterns}};
}

void from_json(const json& j, DatasetManifest& m) {
  const int version = j.at("schema_version").get<int>();
  if (version != DatasetManifest::kSchemaVersion) {
    throw IoError("dataset manifest schema version " + std::to_string(version) + " is not supported");
  }
  m.base = SimConfig{};
  from_json(j.at("sim_config"), m.base);
  j.at("master_seed").get_to(m.master_seed);
  j.at("realizations_per_setting").get_to(m.realizations_per_setting);
  j.at("settings").get_to(m.settings);
  m.files.clear();
  for (const auto& f : j.at("files")) {
    m.files.push_back({f.at("file").get<std::string>(), f.at("setting").get<std::size_t>(),
                       f.at("realization").get<std::size_t>(), f.at("seed").get<std::uint64_t>()});
  }
  const auto& s = j.at("split");
  s.at("train").get_to(m.split.train);
  s.at("val").get_to(m.split.val);
  s.at("test").get_to(m.split.test);
}

void to_json(json& j, const ModelConfig& c) {
  j = json{{"input_freq", c.input_freq},       {"input_sym", c.input_sym},
           {"output_freq", c.output_freq},     {"output_sym", c.output_sym},
           {"front_channels", c.front_channels}, {"kernel", c.kernel},
           {"gru_hidden", c.gru_hidden},       {"head_channels", c.head_channels},
           {"tail_channels", c.tail_channels}};
}

void from_json(const json& j, ModelConfig& c) {
  maybe_get(j, "input_freq", c.input_freq);
  maybe_get(j, "input_sym", c.input_sym);
  maybe_get(j, "output_freq", c.output_freq);
  maybe_get(j, "output_sym", c.output_sym);
  maybe_get(j, "front_channels", c.front_channels);
  maybe_get(j, "kernel", c.kernel);
  maybe_get(j, "gru_hidden", c.gru_hidden);
  maybe_get(j, "head_channels", c.head_channels);
  maybe_get(j, "tail_channels", c.tail_channels);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"snr_mixture_db", c.snr_mixture_db},
           {"batch_size", c.batch_size},
           {"lr", c.adam.lr},
           {"adam_beta1", c.adam.beta1},
           {"adam_beta2", c.adam.beta2},
           {"adam_eps", c.adam.eps},
           {"max_epochs", c.max_epochs},
           {"patience", c.patience},
           {"seed", c.seed},
           {"pattern", c.pattern},
           {"val_snrs_db", c.val_snrs_db},
           {"val_seed", c.val_seed},
           {"val_slot_limit", c.val_slot_limit},
           {"max_wall_seconds", c.max_wall_seconds}};
}

void from_json(const json& j, TrainConfig& c) {
  maybe_get(j, "snr_mixture_db", c.snr_mixture_db);
  maybe_get(j, "batch_size", c.batch_size);
  maybe_get(j, "lr", c.adam.lr);
  maybe_get(j, "adam_beta1", c.adam.beta1);
  maybe_get(j, "adam_beta2", c.adam.beta2);
  maybe_get(j, "adam_eps", c.adam.eps);
  maybe_get(j, "max_epochs", c.max_epochs);
  maybe_get(j, "patience", c.patience);
  maybe_get(j, "seed", c.seed);
  maybe_get(j, "pattern", c.pattern);
  maybe_get(j, "val_snrs_db", c.val_snrs_db);
  maybe_get(j, "val_seed", c.val_seed);
  maybe_get(j, "val_slot_limit", c.val_slot_limit);
  maybe_get(j, "max_wall_seconds", c.max_wall_seconds);
}

}  // namespace srf
