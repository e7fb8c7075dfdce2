#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "ala/core/network.hpp"

namespace ala::core {

/// On-disk checkpoint: a JSON object
///   { "format": "ala-tensors/1", "header": {...},
///     "tensors": [ {"name", "rows", "cols", "data": [row-major values]} ] }
/// Doubles are written in shortest round-trip form, so save/load is
/// bit-exact. Model and policy checkpoints share this container and differ
/// only in their header.
struct Checkpoint {
  nlohmann::json header = nlohmann::json::object();
  std::vector<Tensor> tensors;
};

nlohmann::json to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Network checkpoint: header carries the architecture under "network".
Checkpoint network_checkpoint(const Network& net);
Network network_from_checkpoint(const Checkpoint& ckpt);

nlohmann::json spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const nlohmann::json& j);

}  // namespace ala::core
