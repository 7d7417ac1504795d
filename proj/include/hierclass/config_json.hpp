#pragma once

#include "json.hpp"

#include "hierclass/hierarchy.hpp"
#include "hierclass/model.hpp"
#include "hierclass/training.hpp"

namespace hierclass {

// JSON mapping for configuration structs. Reading fills only the keys that
// are present and rejects unknown keys and wrongly typed values.
nlohmann::ordered_json to_json(const ModelConfig& c);
nlohmann::ordered_json to_json(const TrainConfig& c);
nlohmann::ordered_json to_json(const LabelSchema& s);

void update_from_json(ModelConfig& c, const nlohmann::json& j);
void update_from_json(TrainConfig& c, const nlohmann::json& j);
LabelSchema schema_from_json(const nlohmann::json& j);

}  // namespace hierclass
