#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "catgeo/rng.hpp"

namespace catgeo {
namespace {

// Random123 known-answer vectors for philox4x32-10.
TEST(Philox, KnownAnswers) {
    using A4 = std::array<std::uint32_t, 4>;
    EXPECT_EQ(Rng::philox({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Rng::philox({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Rng::philox({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Fnv, KnownAnswers) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(RngTest, SameKeyAndStreamReplays) {
    Rng a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngTest, SplitDoesNotAdvanceParent) {
    Rng a(1), b(1);
    auto child = a.split("x");
    (void)child.next_u32();
    EXPECT_EQ(a.next_u32(), b.next_u32());
}

TEST(RngTest, SplitStreamsDiffer) {
    Rng root(9);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t t = 0; t < 200; ++t) firsts.insert(root.split(t).next_u64());
    firsts.insert(root.split("a").next_u64());
    firsts.insert(root.split("b").next_u64());
    EXPECT_EQ(firsts.size(), 202u);
    EXPECT_EQ(root.split("a").split(3).next_u64(), Rng(9).split("a").split(3).next_u64());
}

TEST(RngTest, UniformRangeAndMoments) {
    Rng r(3);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 5e-3);
    EXPECT_NEAR(sq / n - 0.25, 1.0 / 12.0 - 0.0, 5e-3);
}

TEST(RngTest, NormalMoments) {
    Rng r(4);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal(1.0, 2.0);
        sum += z;
        sq += (z - 1.0) * (z - 1.0);
    }
    EXPECT_NEAR(sum / n, 1.0, 0.02);
    EXPECT_NEAR(std::sqrt(sq / n), 2.0, 0.02);
}

TEST(RngTest, BelowIsUnbiasedAndInRange) {
    Rng r(5);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto v = r.below(7);
        ASSERT_LT(v, 7u);
        ++counts[v];
    }
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(RngTest, ShuffleIsAPermutation) {
    Rng r(6);
    std::vector<int> v(100);
    std::iota(v.begin(), v.end(), 0);
    r.shuffle(std::span<int>(v));
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
    std::vector<int> id(100);
    std::iota(id.begin(), id.end(), 0);
    EXPECT_NE(v, id);
}

}  // namespace
}  // namespace catgeo
