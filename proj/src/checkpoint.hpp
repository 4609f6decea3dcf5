#pragma once

#include <string>

#include "json.hpp"
#include "mask.hpp"
#include "network.hpp"

namespace prunekit {

// Checkpoint container (.nnck): one JSON manifest line followed by a raw
// payload of little-endian f32 parameter tensors in manifest order.
struct Checkpoint {
    Network network;
    PruningMask mask;
};

inline constexpr const char* kCheckpointFormat = "nnck/1";

nlohmann::json layer_spec_to_json(const LayerSpec& spec);
LayerSpec layer_spec_from_json(const nlohmann::json& j);

void save_checkpoint(const Network& net, const PruningMask& mask, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// FNV-1a 64 over the file bytes, as a 16-digit hex string.
std::string file_digest(const std::string& path);

}  // namespace prunekit
