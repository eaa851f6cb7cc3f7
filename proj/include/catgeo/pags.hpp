#pragma once

// Physics-inspired adverse geometry simulation.
//
// Matter accumulation lifts a fraction of accumulable-class points and
// rescales their intensity. Fuzzy recognition attenuates intensity with range
// under a Beer-Lambert two-way fog model and masks the labels of points whose
// echo falls below a floor. The compound scheme applies each with its own
// Bernoulli draw.

#include <cstddef>
#include <string>

#include "catgeo/rng.hpp"
#include "catgeo/types.hpp"

namespace catgeo::pags {

struct AugmentationConfig {
    double beta1 = 0.3;  // P(matter accumulation)
    double beta2 = 0.5;  // P(fuzzy recognition)
    double rho = 0.3;    // coverage rate
    double h1 = 0.05;    // accumulation height range, meters
    double h2 = 0.3;
    double gamma1 = 0.3;  // intensity scale range
    double gamma2 = 1.0;
    double fog_alpha_max = 0.1;   // 1/m
    double fog_threshold = 0.05;  // labels mask strictly below this echo
    /// Select accumulation points among all points instead of only the
    /// accumulable classes.
    bool accumulate_all_points = false;

    void validate() const;
};

struct AugmentationReport {
    bool psi1_applied = false;
    bool psi2_applied = false;
    std::size_t points_accumulated = 0;
    std::size_t labels_masked = 0;
    // Range of the per-point draws (0 when nothing was drawn).
    double h_min = 0.0, h_max = 0.0;
    double gamma_min = 0.0, gamma_max = 0.0;
    double fog_alpha = 0.0;

    /// `key = value` lines.
    std::string to_text() const;
};

struct Augmented {
    Scene scene;
    AugmentationReport report;
};

Augmented psi1_matter_accumulation(const Scene& scene, const ClassTable& table,
                                   const AugmentationConfig& cfg, Rng& rng);

Augmented psi2_fuzzy_recognition(const Scene& scene, const AugmentationConfig& cfg, Rng& rng);

/// Fog with a given attenuation coefficient; psi2 draws alpha then calls this.
Augmented apply_fog(const Scene& scene, double alpha, double threshold);

/// Draws the two Bernoulli gates from `rng`, then runs the selected
/// simulators in order on substreams `rng.split("psi1")` and
/// `rng.split("psi2")`.
Augmented compound_augment(const Scene& scene, const ClassTable& table,
                           const AugmentationConfig& cfg, Rng& rng);

struct StandardAugmentConfig {
    double p_rotate = 0.5;
    double p_scale = 0.5;
    double scale_lo = 0.95;
    double scale_hi = 1.05;
    double p_flip_x = 0.5;
    double p_flip_y = 0.5;
    double p_jitter = 0.5;
    double jitter_sigma = 0.01;  // meters
    double p_dropout = 0.5;
    double dropout_rate = 0.2;

    static StandardAugmentConfig disabled();
};

/// Rotation about z, global scale, axis flips, coordinate jitter and point
/// dropout, each gated by its own probability.
Scene standard_augment(const Scene& scene, Rng& rng, const StandardAugmentConfig& cfg = {});

/// Rotation about the vertical axis by `theta` radians, then uniform scale.
PointCloud rotate_scale(const PointCloud& cloud, double theta, double scale);

}  // namespace catgeo::pags
