#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "catgeo/synth.hpp"
#include "test_util.hpp"

namespace catgeo {
namespace {

using synth::SynthConfig;

bool same_scene(const Scene& a, const Scene& b) {
    if (a.size() != b.size() || a.labels.labels != b.labels.labels) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!testing::same_bits(a.cloud.points[i], b.cloud.points[i])) return false;
    return true;
}

TEST(Synth, Deterministic) {
    SynthConfig cfg;
    cfg.seed = 7;
    for (std::size_t idx : {0u, 5u, 99u}) {
        EXPECT_TRUE(same_scene(synth::generate_scene(cfg, idx), synth::generate_scene(cfg, idx)));
        EXPECT_TRUE(same_scene(synth::generate_test_scene(cfg, idx), synth::generate_test_scene(cfg, idx)));
    }
    EXPECT_FALSE(same_scene(synth::generate_scene(cfg, 0), synth::generate_scene(cfg, 1)));
}

TEST(Synth, EveryClassPresentAndSizes) {
    SynthConfig cfg;
    for (std::size_t n : {6u, 7u, 600u, 601u}) {
        cfg.points_per_scene = n;
        for (std::size_t idx = 0; idx < 5; ++idx) {
            const auto s = synth::generate_scene(cfg, idx);
            ASSERT_EQ(s.size(), n);
            std::vector<std::size_t> counts(6, 0);
            for (auto l : s.labels.labels) {
                ASSERT_LT(l, 6u);
                ++counts[l];
            }
            for (std::size_t c = 0; c < 6; ++c) {
                EXPECT_GE(counts[c], 1u);
                EXPECT_GE(counts[c], n / 6);
                EXPECT_LE(counts[c], n / 6 + 1);
            }
        }
    }
}

TEST(Synth, CoordinatesWithinExtent) {
    SynthConfig cfg;
    for (double extent : {50.0, 10.0}) {
        cfg.scene_extent = extent;
        for (std::size_t idx = 0; idx < 10; ++idx) {
            const auto s = synth::generate_scene(cfg, idx);
            for (const auto& p : s.cloud.points) {
                EXPECT_LE(std::abs(p.x), extent);
                EXPECT_LE(std::abs(p.y), extent);
                EXPECT_LE(std::abs(p.z), extent);
                EXPECT_GE(p.intensity, 0.0f);
                EXPECT_LE(p.intensity, 1.0f);
            }
        }
    }
}

TEST(Synth, IntensityBandsAreDisjointPerClass) {
    SynthConfig cfg;
    std::vector<float> lo(6, 2.0f), hi(6, -1.0f);
    for (std::size_t idx = 0; idx < 20; ++idx) {
        const auto s = synth::generate_scene(cfg, idx);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto c = s.labels.labels[i];
            lo[c] = std::min(lo[c], s.cloud.points[i].intensity);
            hi[c] = std::max(hi[c], s.cloud.points[i].intensity);
        }
    }
    for (std::size_t c = 0; c + 1 < 6; ++c) EXPECT_LT(hi[c], lo[c + 1]);
}

TEST(Synth, ZeroSeverityLeavesTestScenesClean) {
    SynthConfig cfg;
    cfg.shift_severity = 0.0;
    const auto split = synth::make_split(cfg, 2, 5);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_TRUE(same_scene(split.test[i], synth::generate_test_scene(cfg, i)));
}

TEST(Synth, ShiftAccumulatesExactly) {
    SynthConfig cfg;
    cfg.shift_severity = 1.0;
    cfg.shift.rho = 0.5;
    for (std::size_t i = 0; i < 10; ++i) {
        const auto clean = synth::generate_test_scene(cfg, i);
        const auto shifted = synth::shift_scene(cfg, clean, i);
        std::size_t eligible = 0, lifted = 0;
        for (std::size_t n = 0; n < clean.size(); ++n) {
            if (cfg.classes.is_accumulable(clean.labels.labels[n])) ++eligible;
            const auto& a = clean.cloud.points[n];
            const auto& b = shifted.cloud.points[n];
            ASSERT_TRUE(testing::same_bits(a.x, b.x) && testing::same_bits(a.y, b.y));
            if (!testing::same_bits(a.z, b.z)) ++lifted;
            ASSERT_LE(b.intensity, std::max(a.intensity, 1.0f));
        }
        EXPECT_EQ(lifted, eligible / 2);
        EXPECT_EQ(shifted.labels.labels, clean.labels.labels);
    }
}

TEST(Synth, TrainAndTestDisjoint) {
    SynthConfig cfg;
    const auto split = synth::make_split(cfg, 20, 10);
    std::set<std::string> ids;
    for (const auto& s : split.train) ids.insert(s.id);
    for (const auto& s : split.test) EXPECT_EQ(ids.count(s.id), 0u);
    for (std::size_t j = 0; j < 10; ++j) {
        const auto clean = synth::generate_test_scene(cfg, j);
        for (const auto& t : split.train) EXPECT_FALSE(same_scene(t, clean));
    }
}

TEST(Synth, ValidateRejectsTooFewPoints) {
    SynthConfig cfg;
    cfg.points_per_scene = 5;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.points_per_scene = 600;
    cfg.shift_severity = -1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace catgeo
