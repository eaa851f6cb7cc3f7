#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace catgeo {

/// Reserved label for points of unknown category. Excluded from every loss
/// and metric.
inline constexpr std::uint32_t kIgnoreLabel = 65535;

struct Point {
    float x = 0.0f;
    float y = 0.0f;
    float z = 0.0f;
    float intensity = 0.0f;

    friend bool operator==(const Point&, const Point&) = default;
};

struct PointCloud {
    std::vector<Point> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

struct LabelSet {
    std::vector<std::uint32_t> labels;

    std::size_t size() const { return labels.size(); }
    bool is_ignored(std::size_t n) const { return labels[n] == kIgnoreLabel; }
};

/// Class names plus the subset of classes that matter can accumulate on
/// (ground-like surfaces, vegetation, trunks).
struct ClassTable {
    std::vector<std::string> names;
    std::vector<std::uint32_t> accumulable;

    std::size_t size() const { return names.size(); }
    bool is_accumulable(std::uint32_t c) const;
    void validate() const;

    /// ground, terrain, vegetation, trunk, vehicle, building.
    static ClassTable synthetic_default();
};

struct Scene {
    PointCloud cloud;
    LabelSet labels;
    std::string id;

    std::size_t size() const { return cloud.size(); }
    void validate(std::size_t num_classes) const;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace catgeo
