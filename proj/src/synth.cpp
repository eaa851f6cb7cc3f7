#include "catgeo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "catgeo/rng.hpp"

namespace catgeo::synth {
namespace {

constexpr double kGround = -1.73;  // sensor height above the road
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct IntensityBand {
    double lo, hi;
};

// Disjoint per-class echo bands for the six default classes. Tables with
// more classes cycle through them.
constexpr IntensityBand kBands[] = {
    {0.06, 0.18}, {0.22, 0.34}, {0.38, 0.50}, {0.54, 0.66}, {0.70, 0.82}, {0.86, 0.98}};

struct Layout {
    struct Tree {
        double x, y;
    };
    struct Car {
        double x, y, heading;
    };
    struct Wall {
        double angle, range, half_len;
    };
    std::vector<Tree> trees;
    std::vector<Car> cars;
    std::vector<Wall> walls;
};

double polar_x(double r, double a) { return r * std::cos(a); }
double polar_y(double r, double a) { return r * std::sin(a); }

Layout make_layout(Rng& rng) {
    Layout layout;
    for (int i = 0; i < 6; ++i) {
        const double r = rng.uniform(8.0, 30.0), a = rng.uniform(0.0, kTwoPi);
        layout.trees.push_back({polar_x(r, a), polar_y(r, a)});
    }
    for (int i = 0; i < 3; ++i) {
        const double r = rng.uniform(5.0, 22.0), a = rng.uniform(0.0, kTwoPi);
        layout.cars.push_back({polar_x(r, a), polar_y(r, a), rng.uniform(0.0, std::numbers::pi)});
    }
    for (int i = 0; i < 2; ++i)
        layout.walls.push_back({rng.uniform(0.0, kTwoPi), rng.uniform(32.0, 44.0), rng.uniform(8.0, 15.0)});
    return layout;
}

Point sample_point(std::size_t cls, const Layout& layout, Rng& rng) {
    Point p;
    double x = 0, y = 0, z = 0;
    switch (cls % 6) {
        case 0: {  // ground: flat road surface near the sensor
            const double r = std::sqrt(rng.uniform(9.0, 625.0)), a = rng.uniform(0.0, kTwoPi);
            x = polar_x(r, a);
            y = polar_y(r, a);
            z = kGround + rng.normal(0.0, 0.02);
            break;
        }
        case 1: {  // terrain: rougher, slightly raised, further out
            const double r = rng.uniform(10.0, 45.0), a = rng.uniform(0.0, kTwoPi);
            x = polar_x(r, a);
            y = polar_y(r, a);
            z = kGround + 0.25 + rng.normal(0.0, 0.08);
            break;
        }
        case 2: {  // vegetation: crowns above the trunks
            const auto& t = layout.trees[rng.below(layout.trees.size())];
            const double u = rng.uniform(), a = rng.uniform(0.0, kTwoPi), cz = rng.uniform(-1.0, 1.0);
            const double rad = 1.6 * std::cbrt(u), s = std::sqrt(1.0 - cz * cz);
            x = t.x + rad * s * std::cos(a);
            y = t.y + rad * s * std::sin(a);
            z = kGround + 3.6 + rad * cz;
            break;
        }
        case 3: {  // trunk: thin vertical cylinders
            const auto& t = layout.trees[rng.below(layout.trees.size())];
            const double a = rng.uniform(0.0, kTwoPi);
            x = t.x + 0.25 * std::cos(a);
            y = t.y + 0.25 * std::sin(a);
            z = kGround + rng.uniform(0.0, 2.0);
            break;
        }
        case 4: {  // vehicle: surface of a box resting on the road
            const auto& c = layout.cars[rng.below(layout.cars.size())];
            const double lx = rng.uniform(-2.1, 2.1), ly = rng.uniform(-0.9, 0.9);
            double local_x = lx, local_y = ly;
            const double face = rng.uniform();
            if (face < 0.35) local_x = lx < 0 ? -2.1 : 2.1;
            else if (face < 0.7) local_y = ly < 0 ? -0.9 : 0.9;
            z = kGround + (face < 0.7 ? rng.uniform(0.3, 1.5) : 1.5);
            const double ch = std::cos(c.heading), sh = std::sin(c.heading);
            x = c.x + ch * local_x - sh * local_y;
            y = c.y + sh * local_x + ch * local_y;
            break;
        }
        default: {  // building: tall facades at the edge of the scene
            const auto& w = layout.walls[rng.below(layout.walls.size())];
            const double t = rng.uniform(-w.half_len, w.half_len);
            const double nx = std::cos(w.angle), ny = std::sin(w.angle);
            x = nx * w.range - ny * t + rng.normal(0.0, 0.05);
            y = ny * w.range + nx * t + rng.normal(0.0, 0.05);
            z = kGround + rng.uniform(0.0, 8.0);
            break;
        }
    }
    const auto band = kBands[cls % 6];
    p.x = static_cast<float>(x);
    p.y = static_cast<float>(y);
    p.z = static_cast<float>(z);
    p.intensity = static_cast<float>(rng.uniform(band.lo, band.hi));
    return p;
}

Scene generate_from(const SynthConfig& cfg, Rng rng, std::string id) {
    cfg.validate();
    const std::size_t C = cfg.classes.size();
    const std::size_t N = cfg.points_per_scene;
    const Layout layout = make_layout(rng);
    Scene scene;
    scene.id = std::move(id);
    scene.cloud.points.reserve(N);
    scene.labels.labels.reserve(N);
    const auto extent = static_cast<float>(cfg.scene_extent);
    for (std::size_t c = 0; c < C; ++c) {
        const std::size_t quota = N / C + (c < N % C ? 1 : 0);
        for (std::size_t k = 0; k < quota; ++k) {
            Point p = sample_point(c, layout, rng);
            p.x = std::clamp(p.x, -extent, extent);
            p.y = std::clamp(p.y, -extent, extent);
            p.z = std::clamp(p.z, -extent, extent);
            scene.cloud.points.push_back(p);
            scene.labels.labels.push_back(static_cast<std::uint32_t>(c));
        }
    }
    // Interleave classes so scene order carries no label information.
    std::vector<std::size_t> order(N);
    for (std::size_t i = 0; i < N; ++i) order[i] = i;
    rng.shuffle(std::span<std::size_t>(order));
    Scene shuffled;
    shuffled.id = scene.id;
    shuffled.cloud.points.reserve(N);
    shuffled.labels.labels.reserve(N);
    for (auto i : order) {
        shuffled.cloud.points.push_back(scene.cloud.points[i]);
        shuffled.labels.labels.push_back(scene.labels.labels[i]);
    }
    return shuffled;
}

std::string scene_name(const char* prefix, std::size_t idx) {
    std::string digits = std::to_string(idx);
    if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
    return prefix + digits;
}

}  // namespace

void SynthConfig::validate() const {
    classes.validate();
    if (points_per_scene < classes.size())
        throw std::invalid_argument("synth: points_per_scene must be >= number of classes");
    if (!(shift_severity >= 0.0)) throw std::invalid_argument("synth: shift_severity must be >= 0");
    if (!(scene_extent > 0.0)) throw std::invalid_argument("synth: scene_extent must be > 0");
}

Scene generate_scene(const SynthConfig& cfg, std::size_t idx) {
    return generate_from(cfg, Rng(cfg.seed).split("train").split(idx), scene_name("train_", idx));
}

Scene generate_test_scene(const SynthConfig& cfg, std::size_t idx) {
    return generate_from(cfg, Rng(cfg.seed).split("test").split(idx), scene_name("test_", idx));
}

Scene shift_scene(const SynthConfig& cfg, const Scene& clean, std::size_t idx) {
    pags::AugmentationConfig shift = cfg.shift;
    shift.rho = std::min(1.0, shift.rho * cfg.shift_severity);
    shift.fog_alpha_max = shift.fog_alpha_max * cfg.shift_severity;
    Rng rng = Rng(cfg.seed).split("shift").split(idx);
    Rng psi1_rng = rng.split("psi1");
    Rng psi2_rng = rng.split("psi2");
    auto lifted = pags::psi1_matter_accumulation(clean, cfg.classes, shift, psi1_rng);
    auto fogged = pags::psi2_fuzzy_recognition(lifted.scene, shift, psi2_rng);
    fogged.scene.labels = clean.labels;
    return std::move(fogged.scene);
}

Split make_split(const SynthConfig& cfg, std::size_t n_train, std::size_t n_test) {
    if (n_train < 1 || n_test < 1) throw std::invalid_argument("make_split: need at least one scene per side");
    Split split;
    split.train.reserve(n_train);
    split.test.reserve(n_test);
    for (std::size_t i = 0; i < n_train; ++i) split.train.push_back(generate_scene(cfg, i));
    for (std::size_t i = 0; i < n_test; ++i) split.test.push_back(shift_scene(cfg, generate_test_scene(cfg, i), i));
    return split;
}

}  // namespace catgeo::synth
