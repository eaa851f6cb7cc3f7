#pragma once

#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "catgeo/rng.hpp"
#include "catgeo/types.hpp"

namespace catgeo::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("catgeo_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline bool same_bits(float a, float b) {
    std::uint32_t ua, ub;
    std::memcpy(&ua, &a, 4);
    std::memcpy(&ub, &b, 4);
    return ua == ub;
}

inline bool same_bits(const Point& a, const Point& b) {
    return same_bits(a.x, b.x) && same_bits(a.y, b.y) && same_bits(a.z, b.z) &&
           same_bits(a.intensity, b.intensity);
}

/// Random scene with finite coordinates in [-extent, extent], intensity in
/// [0, 1] and labels below num_classes (plus the occasional ignore).
inline Scene random_scene(Rng& rng, std::size_t n, std::size_t num_classes, double extent = 40.0,
                          const std::string& id = "scene") {
    Scene s;
    s.id = id;
    s.cloud.points.resize(n);
    s.labels.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& p = s.cloud.points[i];
        p.x = static_cast<float>(rng.uniform(-extent, extent));
        p.y = static_cast<float>(rng.uniform(-extent, extent));
        p.z = static_cast<float>(rng.uniform(-3.0, 5.0));
        p.intensity = static_cast<float>(rng.uniform());
        s.labels.labels[i] = rng.bernoulli(0.05) ? kIgnoreLabel : static_cast<std::uint32_t>(rng.below(num_classes));
    }
    return s;
}

}  // namespace catgeo::testing
