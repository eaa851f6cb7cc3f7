#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "catgeo/pags.hpp"
#include "catgeo/types.hpp"

namespace catgeo::synth {

struct SynthConfig {
    ClassTable classes = ClassTable::synthetic_default();
    std::size_t points_per_scene = 600;
    double scene_extent = 50.0;  // meters; coordinates are clamped to +-extent
    /// Multiplier on `shift.rho` and `shift.fog_alpha_max` for test scenes.
    double shift_severity = 1.0;
    pags::AugmentationConfig shift;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Deterministic in (seed, idx). Points are split evenly across classes
/// (remainder to the lowest ids), so every class appears when N >= C.
Scene generate_scene(const SynthConfig& cfg, std::size_t idx);

/// Clean scene drawn from the test seed range, disjoint from training.
Scene generate_test_scene(const SynthConfig& cfg, std::size_t idx);

/// Applies matter accumulation (rho * severity) and fog
/// (fog_alpha_max * severity) to a clean test scene. Labels stay the
/// pre-masking ground truth.
Scene shift_scene(const SynthConfig& cfg, const Scene& clean, std::size_t idx);

struct Split {
    std::vector<Scene> train;
    std::vector<Scene> test;
};

Split make_split(const SynthConfig& cfg, std::size_t n_train, std::size_t n_test);

}  // namespace catgeo::synth
