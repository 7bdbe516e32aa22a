#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "abrlab/nn.hpp"

namespace abrlab {

struct CheckpointMeta {
  std::size_t epoch = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct Checkpoint {
  Mlp net;
  CheckpointMeta meta;
};

/// {"layer_dims", "weights" (per layer, rows of out x in), "biases", "head",
/// "meta": {"epoch", "seed", "config_hash"}}.
nlohmann::json checkpoint_to_json(const Mlp& net, const CheckpointMeta& meta);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const Mlp& net, const CheckpointMeta& meta);
/// Throws ParseError on malformed documents or inconsistent shapes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace abrlab
