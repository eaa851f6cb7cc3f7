#include "catgeo/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "catgeo/cge.hpp"
#include "catgeo/model.hpp"
#include "catgeo/pags.hpp"
#include "catgeo/rng.hpp"

namespace catgeo::gradcheck {
namespace {

struct Problem {
    model::PointNetLite net;
    cge::EmbeddingMatrix embedding;
    cge::RelationMatrix relation;
    Scene original;
    Scene augmented;
};

Problem make_problem(const Options& opts, Rng rng) {
    const std::size_t C = opts.num_classes;
    const std::size_t D = opts.feature_dim;
    Rng shape_rng = rng.split("shape");
    const std::size_t n = 2 + static_cast<std::size_t>(shape_rng.below(std::max<std::size_t>(opts.max_points, 2) - 1));
    Rng net_rng = rng.split("network");
    Rng emb_rng = rng.split("embedding");
    Rng rel_rng = rng.split("relation");
    Problem p{model::PointNetLite::random({4, 8, 8, D}, C, net_rng),
              cge::EmbeddingMatrix::random(D, C, opts.num_props, emb_rng),
              cge::RelationMatrix::random(C, opts.num_props, rel_rng),
              {},
              {}};
    // Non-zero biases so their gradients are exercised away from the origin.
    for (auto& layer : p.net.layers())
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = net_rng.normal(0.0, 0.1);

    Rng data_rng = rng.split("data");
    p.original.id = "gradcheck";
    for (std::size_t i = 0; i < n; ++i) {
        p.original.cloud.points.push_back(Point{static_cast<float>(data_rng.uniform(-30.0, 30.0)),
                                                static_cast<float>(data_rng.uniform(-30.0, 30.0)),
                                                static_cast<float>(data_rng.uniform(-2.0, 4.0)),
                                                static_cast<float>(data_rng.uniform())});
        p.original.labels.labels.push_back(data_rng.uniform() < 0.1 ? kIgnoreLabel
                                                                    : static_cast<std::uint32_t>(data_rng.below(C)));
    }
    ClassTable table;
    for (std::size_t c = 0; c < C; ++c) table.names.push_back("class" + std::to_string(c));
    table.accumulable = {0, 1};
    pags::AugmentationConfig aug;
    aug.beta1 = 1.0;
    aug.beta2 = 1.0;
    Rng aug_rng = rng.split("augment");
    p.augmented = pags::compound_augment(p.original, table, aug, aug_rng).scene;
    return p;
}

double total_loss(const Options& opts, const Problem& p, model::Gradients* grads) {
    model::GradientTape tape(p.net, p.relation);
    const auto orig = tape.record(p.original.cloud);
    if (opts.seg) tape.add_seg_loss(orig, p.original.labels, 1.0);
    if (opts.gpl) tape.add_geometry_loss(orig, p.embedding, p.original.labels, 1.0);
    if (opts.gcl) {
        const auto aug = tape.record(p.augmented.cloud);
        tape.add_geometry_loss(aug, p.embedding, p.augmented.labels, 1.0);
    }
    const auto total = tape.total();
    if (grads) *grads = tape.backward(total);
    return total.value;
}

}  // namespace

Report run(const Options& opts) {
    Report report;
    const Rng root = Rng(opts.seed).split("gradcheck");
    for (std::size_t k = 0; k < opts.configs; ++k) {
        Problem p = make_problem(opts, root.split(k));
        const auto checksum = p.embedding.checksum();
        model::Gradients analytic;
        total_loss(opts, p, &analytic);
        if (p.embedding.checksum() != checksum) report.embedding_untouched = false;

        auto params = model::trainable(p.net, p.relation);
        const auto grads = analytic.views();
        for (std::size_t t = 0; t < params.size(); ++t) {
            for (std::size_t i = 0; i < params[t].size(); ++i) {
                double& x = params[t][i];
                const double saved = x;
                x = saved + opts.step;
                const double up = total_loss(opts, p, nullptr);
                x = saved - opts.step;
                const double down = total_loss(opts, p, nullptr);
                x = saved;
                const double numeric = (up - down) / (2.0 * opts.step);
                const double a = grads[t][i];
                const double scale = std::max(std::abs(a), std::abs(numeric));
                const double diff = std::abs(a - numeric);
                bool ok;
                if (scale < opts.abs_floor) {
                    ok = diff <= opts.abs_floor;
                } else {
                    const double rel = diff / scale;
                    report.max_rel_error = std::max(report.max_rel_error, rel);
                    ok = rel <= opts.rel_tol;
                }
                ++report.coordinates;
                if (!ok) {
                    if (report.failures == 0) {
                        std::ostringstream os;
                        os.precision(12);
                        os << "config " << k << " tensor " << t << " index " << i << ": analytic " << a
                           << " numeric " << numeric;
                        report.first_failure = os.str();
                    }
                    ++report.failures;
                }
            }
        }
        if (p.embedding.checksum() != checksum) report.embedding_untouched = false;
        ++report.configs;
    }
    return report;
}

}  // namespace catgeo::gradcheck
