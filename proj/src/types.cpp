#include "catgeo/types.hpp"

#include <algorithm>
#include <cmath>

namespace catgeo {

bool ClassTable::is_accumulable(std::uint32_t c) const {
    return std::find(accumulable.begin(), accumulable.end(), c) != accumulable.end();
}

void ClassTable::validate() const {
    if (names.empty()) throw std::invalid_argument("class table has no classes");
    for (auto c : accumulable) {
        if (c >= names.size())
            throw std::invalid_argument("accumulable class id " + std::to_string(c) +
                                        " outside class table of size " +
                                        std::to_string(names.size()));
    }
}

ClassTable ClassTable::synthetic_default() {
    return ClassTable{{"ground", "terrain", "vegetation", "trunk", "vehicle", "building"},
                      {0, 1, 2, 3}};
}

void Scene::validate(std::size_t num_classes) const {
    if (cloud.size() != labels.size())
        throw DimensionError("scene '" + id + "': " + std::to_string(cloud.size()) +
                             " points but " + std::to_string(labels.size()) + " labels");
    for (std::size_t n = 0; n < cloud.size(); ++n) {
        const auto& p = cloud.points[n];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
            !std::isfinite(p.intensity))
            throw std::invalid_argument("scene '" + id + "': non-finite point at index " +
                                        std::to_string(n));
        const auto l = labels.labels[n];
        if (l != kIgnoreLabel && l >= num_classes)
            throw std::invalid_argument("scene '" + id + "': label " + std::to_string(l) +
                                        " at index " + std::to_string(n) + " >= C");
    }
}

}  // namespace catgeo
