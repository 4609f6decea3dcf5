#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "network.hpp"

namespace prunekit {

// The set of units forced to zero output, kept sorted by (layer, unit).
struct PruningMask {
    std::vector<UnitId> units;
    nlohmann::json origin = nlohmann::json::object();

    bool empty() const { return units.empty(); }
    std::size_t size() const { return units.size(); }

    void normalize();  // sort + dedupe
    bool contains(const UnitId& id) const;

    nlohmann::json to_json() const;
    static PruningMask from_json(const nlohmann::json& j);
};

// Per-layer boolean view of a mask, validated against a concrete network.
// Throws data_error listing any identifiers that name no existing unit.
std::vector<std::vector<char>> mask_layer_flags(const Network& net, const PruningMask& mask);

}  // namespace prunekit
