#include "mask.hpp"

#include <algorithm>
#include <sstream>

#include "error.hpp"

namespace prunekit {

void PruningMask::normalize() {
    std::sort(units.begin(), units.end());
    units.erase(std::unique(units.begin(), units.end()), units.end());
}

bool PruningMask::contains(const UnitId& id) const {
    return std::binary_search(units.begin(), units.end(), id);
}

nlohmann::json PruningMask::to_json() const {
    nlohmann::json j;
    j["origin"] = origin;
    auto arr = nlohmann::json::array();
    for (const auto& u : units) arr.push_back({u.layer, u.unit});
    j["units"] = arr;
    return j;
}

PruningMask PruningMask::from_json(const nlohmann::json& j) {
    PruningMask mask;
    if (j.contains("origin")) mask.origin = j.at("origin");
    for (const auto& e : j.at("units")) {
        mask.units.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>()});
    }
    mask.normalize();
    return mask;
}

std::vector<std::vector<char>> mask_layer_flags(const Network& net, const PruningMask& mask) {
    std::vector<std::vector<char>> flags(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        flags[i].assign(net.layers[i].spec.unit_count(), 0);
    }
    std::vector<UnitId> bad;
    for (const auto& u : mask.units) {
        if (u.layer >= flags.size() || u.unit >= flags[u.layer].size()) {
            bad.push_back(u);
            continue;
        }
        flags[u.layer][u.unit] = 1;
    }
    if (!bad.empty()) {
        std::ostringstream os;
        os << "mask names unknown units:";
        for (const auto& u : bad) os << " (" << u.layer << "," << u.unit << ")";
        throw data_error(os.str());
    }
    return flags;
}

}  // namespace prunekit
