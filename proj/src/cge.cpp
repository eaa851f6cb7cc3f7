#include "catgeo/cge.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "catgeo/losses.hpp"

namespace catgeo::cge {

EmbeddingMatrix::EmbeddingMatrix(std::size_t feature_dim, std::size_t num_classes,
                                 std::size_t num_props)
    : flat_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(feature_dim),
                                  static_cast<Eigen::Index>(num_classes * num_props))),
      num_classes_(num_classes),
      num_props_(num_props) {}

EmbeddingMatrix EmbeddingMatrix::random(std::size_t feature_dim, std::size_t num_classes,
                                        std::size_t num_props, Rng& rng) {
    EmbeddingMatrix A(feature_dim, num_classes, num_props);
    const double sd = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    for (std::size_t c = 0; c < num_classes; ++c) {
        auto blk = A.block(c);
        for (Eigen::Index j = 0; j < blk.cols(); ++j)
            for (Eigen::Index i = 0; i < blk.rows(); ++i) blk(i, j) = rng.normal(0.0, sd);
        const double norm = blk.norm();
        if (norm > 0.0) blk /= norm;
    }
    return A;
}

std::uint64_t EmbeddingMatrix::checksum() const {
    std::uint64_t h = 0xCBF29CE484222325ull;
    const auto* bytes = reinterpret_cast<const unsigned char*>(flat_.data());
    const std::size_t len = static_cast<std::size_t>(flat_.size()) * sizeof(double);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

RelationMatrix RelationMatrix::random(std::size_t num_classes, std::size_t num_props, Rng& rng) {
    const auto rows = static_cast<Eigen::Index>(num_classes * num_props);
    const auto cols = static_cast<Eigen::Index>(num_classes);
    RelationMatrix Q{Eigen::MatrixXd(rows, cols)};
    const double sd = 1.0 / std::sqrt(static_cast<double>(rows));
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) Q.values(i, j) = rng.normal(0.0, sd);
    return Q;
}

GeometryEmbedding embed(const Eigen::Ref<const FeatureMatrix>& features, const EmbeddingMatrix& A) {
    if (static_cast<std::size_t>(features.cols()) != A.feature_dim())
        throw DimensionError("embed: features have " + std::to_string(features.cols()) +
                             " columns, embedding expects D = " + std::to_string(A.feature_dim()));
    GeometryEmbedding G;
    G.num_classes = A.num_classes();
    G.num_props = A.num_props();
    G.values.noalias() = features * A.flat();
    return G;
}

std::optional<sinkhorn::TransportPlan> class_plan(const GeometryEmbedding& G,
                                                  std::span<const std::size_t> points,
                                                  std::size_t c,
                                                  const sinkhorn::SinkhornConfig& cfg) {
    if (c >= G.num_classes)
        throw DimensionError("class_plan: class " + std::to_string(c) + " >= C = " +
                             std::to_string(G.num_classes));
    if (points.empty()) return std::nullopt;
    const auto m = static_cast<Eigen::Index>(G.num_props);
    const auto col0 = static_cast<Eigen::Index>(c * G.num_props);
    Eigen::MatrixXd slice(static_cast<Eigen::Index>(points.size()), m);
    for (std::size_t r = 0; r < points.size(); ++r)
        slice.row(static_cast<Eigen::Index>(r)) =
            G.values.row(static_cast<Eigen::Index>(points[r])).segment(col0, m);
    return sinkhorn::solve(slice, cfg);
}

std::optional<sinkhorn::TransportPlan> class_plan(const GeometryEmbedding& G, const LabelSet& labels,
                                                  std::size_t c,
                                                  const sinkhorn::SinkhornConfig& cfg) {
    if (labels.size() != static_cast<std::size_t>(G.values.rows()))
        throw DimensionError("class_plan: label count does not match embedding rows");
    const auto points = labeled_points(labels, c);
    return class_plan(G, points, c, cfg);
}

std::optional<Eigen::MatrixXd> class_update(const Eigen::Ref<const FeatureMatrix>& features,
                                            const sinkhorn::TransportPlan& plan,
                                            std::span<const std::size_t> reliable) {
    if (reliable.empty()) return std::nullopt;
    if (static_cast<std::size_t>(plan.plan.rows()) != reliable.size())
        throw DimensionError("class_update: plan has " + std::to_string(plan.plan.rows()) +
                             " rows for " + std::to_string(reliable.size()) + " reliable points");
    Eigen::MatrixXd gathered(static_cast<Eigen::Index>(reliable.size()), features.cols());
    for (std::size_t r = 0; r < reliable.size(); ++r)
        gathered.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(reliable[r]));
    Eigen::MatrixXd update = gathered.transpose() * plan.plan;
    return update;
}

std::vector<std::size_t> reliable_points(const LabelSet& labels,
                                         std::span<const std::uint32_t> predictions, std::size_t c) {
    if (predictions.size() != labels.size())
        throw DimensionError("reliable_points: " + std::to_string(predictions.size()) +
                             " predictions for " + std::to_string(labels.size()) + " labels");
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < labels.size(); ++n)
        if (labels.labels[n] == c && predictions[n] == c) out.push_back(n);
    return out;
}

std::vector<std::size_t> labeled_points(const LabelSet& labels, std::size_t c) {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < labels.size(); ++n)
        if (labels.labels[n] == c) out.push_back(n);
    return out;
}

MomentumReport momentum_update(EmbeddingMatrix& A,
                               const std::map<std::size_t, Eigen::MatrixXd>& updates,
                               double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("momentum_update: epsilon must lie in [0, 1]");
    MomentumReport report;
    for (const auto& [c, update] : updates) {
        if (c >= A.num_classes())
            throw DimensionError("momentum_update: class " + std::to_string(c) + " >= C");
        auto blk = A.block(c);
        if (update.rows() != blk.rows() || update.cols() != blk.cols())
            throw DimensionError("momentum_update: update block shape mismatch for class " +
                                 std::to_string(c));
        const double norm = update.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            A.count_skipped();
            ++report.skipped;
            continue;
        }
        if (epsilon == 1.0) {
            ++report.updated;
            continue;
        }
        blk = epsilon * blk + ((1.0 - epsilon) / norm) * update;
        ++report.updated;
    }
    return report;
}

Eigen::MatrixXd geometry_logits(const GeometryEmbedding& G, const RelationMatrix& Q) {
    if (G.values.cols() != Q.values.rows() ||
        static_cast<std::size_t>(Q.values.cols()) != G.num_classes)
        throw DimensionError("geometry loss: relation matrix is " + std::to_string(Q.values.rows()) +
                             "x" + std::to_string(Q.values.cols()) + ", embedding needs " +
                             std::to_string(G.values.cols()) + "x" + std::to_string(G.num_classes));
    Eigen::MatrixXd logits;
    logits.noalias() = G.values * Q.values;
    return logits;
}

GeometryLoss gpl_loss(const GeometryEmbedding& G, const RelationMatrix& Q, const LabelSet& labels) {
    const auto ce = softmax_cross_entropy(geometry_logits(G, Q), labels);
    GeometryLoss out;
    out.value = ce.value;
    out.count = ce.count;
    out.grad_embedding.noalias() = ce.grad_logits * Q.values.transpose();
    out.grad_relation.noalias() = G.values.transpose() * ce.grad_logits;
    return out;
}

GeometryLoss geometry_loss(const Eigen::Ref<const FeatureMatrix>& features, const EmbeddingMatrix& A,
                           const RelationMatrix& Q, const LabelSet& labels) {
    auto out = gpl_loss(embed(features, A), Q, labels);
    out.grad_features.noalias() = out.grad_embedding * A.flat().transpose();
    return out;
}

}  // namespace catgeo::cge
