#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "catgeo/losses.hpp"
#include "catgeo/metrics.hpp"
#include "catgeo/pags.hpp"
#include "catgeo/synth.hpp"
#include "test_util.hpp"

namespace catgeo {
namespace {

using metrics::ConfusionMatrix;

struct NaiveIou {
    std::vector<std::optional<double>> iou;
    std::optional<double> miou;
};

/// IoU from explicit point sets: |T & P| / |T | P| over non-ignored points.
NaiveIou naive_iou(const LabelSet& truth, const std::vector<std::uint32_t>& pred, std::size_t C) {
    NaiveIou out;
    double sum = 0;
    int present = 0;
    for (std::size_t c = 0; c < C; ++c) {
        std::set<std::size_t> T, P;
        for (std::size_t n = 0; n < pred.size(); ++n) {
            if (truth.labels[n] == kIgnoreLabel) continue;
            if (truth.labels[n] == c) T.insert(n);
            if (pred[n] == c) P.insert(n);
        }
        if (T.empty()) {
            out.iou.push_back(std::nullopt);
            continue;
        }
        std::size_t inter = 0;
        for (auto n : T) inter += P.count(n);
        std::set<std::size_t> uni = T;
        uni.insert(P.begin(), P.end());
        const double v = static_cast<double>(inter) / static_cast<double>(uni.size());
        out.iou.push_back(v);
        sum += v;
        ++present;
    }
    if (present) out.miou = sum / present;
    return out;
}

TEST(Confusion, PerfectPredictions) {
    LabelSet t{{0, 1, 1, 3, kIgnoreLabel}};
    ConfusionMatrix cm(4);
    cm.add(t, std::vector<std::uint32_t>{0, 1, 1, 3, 2});
    EXPECT_EQ(cm.iou(0), 1.0);
    EXPECT_EQ(cm.iou(1), 1.0);
    EXPECT_FALSE(cm.iou(2).has_value());
    EXPECT_EQ(cm.miou(), 1.0);
}

TEST(Confusion, DisjointClassIsZero) {
    LabelSet t{{0, 0, 1}};
    ConfusionMatrix cm(2);
    cm.add(t, std::vector<std::uint32_t>{1, 1, 1});
    EXPECT_EQ(cm.iou(0), 0.0);
}

TEST(Confusion, MatchesSetOracle) {
    Rng rng(1);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t C = 2 + rng.below(5);
        LabelSet t;
        std::vector<std::uint32_t> p;
        for (int n = 0; n < 50; ++n) {
            t.labels.push_back(rng.bernoulli(0.1) ? kIgnoreLabel : std::uint32_t(rng.below(C)));
            p.push_back(std::uint32_t(rng.below(C)));
        }
        ConfusionMatrix cm(C);
        cm.add(t, p);
        const auto ref = naive_iou(t, p, C);
        for (std::size_t c = 0; c < C; ++c) EXPECT_EQ(cm.iou(c), ref.iou[c]);
        EXPECT_EQ(cm.miou(), ref.miou);
        const auto r = metrics::report_from(cm, [&] {
            ClassTable tab;
            for (std::size_t c = 0; c < C; ++c) tab.names.push_back("c" + std::to_string(c));
            return tab;
        }());
        for (const auto& v : r.iou)
            if (v) {
                EXPECT_GE(*v, 0.0);
                EXPECT_LE(*v, 1.0);
            }
    }
}

TEST(Confusion, EmptyHasNoMiou) {
    ConfusionMatrix cm(3);
    EXPECT_FALSE(cm.miou().has_value());
}

TEST(Report, TextFormat) {
    ConfusionMatrix cm(2);
    cm.add(LabelSet{{0, 0}}, std::vector<std::uint32_t>{0, 0});
    ClassTable t;
    t.names = {"road", "car"};
    auto r = metrics::report_from(cm, t);
    r.extra.emplace_back("miou.severity_1", 0.5);
    EXPECT_EQ(r.to_text(), "miou = 1\npoints = 2\niou.road = 1\niou.car = absent\nmiou.severity_1 = 0.5\n");
}

model::PointNetLite trained_like_net(std::uint64_t seed) {
    Rng rng(seed);
    return model::PointNetLite::random({4, 16, 8}, 6, rng);
}

TEST(Tta, IdentityTransformEqualsBase) {
    const auto net = trained_like_net(2);
    const auto s = synth::generate_test_scene({}, 0);
    const std::vector<double> a = {0.0}, k = {1.0};
    const auto p = metrics::tta_probabilities(net, s.cloud, a, k);
    EXPECT_EQ(p, softmax_rows(model::forward(net, s.cloud).logits));
}

TEST(Tta, DuplicateTransformsAreIdempotent) {
    const auto net = trained_like_net(3);
    const auto s = synth::generate_test_scene({}, 1);
    const std::vector<double> a = {90.0}, aa = {90.0, 90.0}, k = {1.05};
    EXPECT_LT((metrics::tta_probabilities(net, s.cloud, a, k) - metrics::tta_probabilities(net, s.cloud, aa, k))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-15);
}

TEST(Tta, MatchesLoopOracle) {
    const auto net = trained_like_net(4);
    const auto s = synth::generate_test_scene({}, 2);
    const std::vector<double> angles = {0.0, 90.0, 180.0, 270.0}, scales = {0.95, 1.0, 1.05};
    const auto p = metrics::tta_probabilities(net, s.cloud, angles, scales);
    Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(long(s.size()), 6);
    for (double a : angles)
        for (double k : scales) {
            const double th = a * std::numbers::pi / 180.0;
            // Coordinates are stored as float, so the oracle has to round the
            // same expression the same way: scaled rotation matrix times (x, y).
            const double kc = std::cos(th) * k, ks = std::sin(th) * k;
            PointCloud c = s.cloud;
            for (auto& q : c.points) {
                const double x = q.x, y = q.y;
                q.x = float(kc * x - ks * y);
                q.y = float(ks * x + kc * y);
                q.z = float(double(q.z) * k);
            }
            const auto logits = model::forward(net, c).logits;
            for (long n = 0; n < logits.rows(); ++n) {
                double mx = logits.row(n).maxCoeff(), z = 0;
                for (long j = 0; j < 6; ++j) z += std::exp(logits(n, j) - mx);
                for (long j = 0; j < 6; ++j) ref(n, j) += std::exp(logits(n, j) - mx) / z / 12.0;
            }
        }
    EXPECT_LT((p - ref).cwiseAbs().maxCoeff(), 1e-12);
    for (long n = 0; n < p.rows(); ++n) EXPECT_NEAR(p.row(n).sum(), 1.0, 1e-12);
}

TEST(Evaluate, ErrorsAndPerfectModel) {
    const auto net = trained_like_net(5);
    ClassTable four;
    four.names = {"a", "b", "c", "d"};
    const std::vector<Scene> scenes = {synth::generate_test_scene({}, 0)};
    EXPECT_THROW(metrics::evaluate(net, scenes, four), DimensionError);
    EXPECT_THROW(metrics::evaluate(net, std::span<const Scene>{}, ClassTable::synthetic_default()), std::invalid_argument);

    // Head that always predicts class 0: IoU(0) = support/total, others 0.
    model::PointNetLite constant({4, 3}, 6);
    constant.head().bias(0) = 1.0;
    const auto r = metrics::evaluate(constant, scenes, ClassTable::synthetic_default());
    ASSERT_TRUE(r.iou[0]);
    EXPECT_NEAR(*r.iou[0], 100.0 / 600.0, 1e-12);
    EXPECT_EQ(*r.iou[3], 0.0);
    EXPECT_EQ(r.points, 600u);
}

}  // namespace
}  // namespace catgeo
