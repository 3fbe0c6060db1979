#pragma once

#include "json.hpp"
#include "srf/dataset.hpp"
#include "srf/model.hpp"
#include "srf/training.hpp"

namespace srf {

using nlohmann::json;

void to_json(json& j, const SimConfig& c);
// Missing fields keep their current values, so a partial object overrides defaults.
void from_json(const json& j, SimConfig& c);
void to_json(json& j, const ChannelSetting& s);
void from_json(const json& j, ChannelSetting& s);
void to_json(json& j, const PilotPattern& p);
void from_json(const json& j, PilotPattern& p);
void to_json(json& j, const DatasetManifest& m);
void from_json(const json& j, DatasetManifest& m);

void to_json(json& j, const ModelConfig& c);
void from_json(const json& j, ModelConfig& c);
// Adam fields are flattened: lr, adam_beta1, adam_beta2, adam_eps.
void to_json(json& j, const TrainConfig& c);
void from_json(const json& j, TrainConfig& c);

}  // namespace srf
