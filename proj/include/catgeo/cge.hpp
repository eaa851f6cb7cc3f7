#pragma once

// Category-level geometry embedding.
//
// Per-point features F (N x D) are mapped into a per-class geometric space
// by the embedding matrix A, stored as C blocks of shape D x M. The blocks
// are built from entropic transport plans between a class's points and its
// M geometric-property slots, and are only ever changed by a momentum
// update, never by gradients. A learnable relation matrix Q (CM x C) maps
// the flattened embedding to class logits.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "catgeo/rng.hpp"
#include "catgeo/sinkhorn.hpp"
#include "catgeo/types.hpp"

namespace catgeo::cge {

using FeatureMatrix = Eigen::MatrixXd;  // N x D

class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    /// All-zero blocks.
    EmbeddingMatrix(std::size_t feature_dim, std::size_t num_classes, std::size_t num_props);

    /// Zero-mean Gaussian entries with stddev 1/sqrt(D), each block then
    /// scaled to unit Frobenius norm.
    static EmbeddingMatrix random(std::size_t feature_dim, std::size_t num_classes,
                                  std::size_t num_props, Rng& rng);

    std::size_t feature_dim() const { return static_cast<std::size_t>(flat_.rows()); }
    std::size_t num_classes() const { return num_classes_; }
    std::size_t num_props() const { return num_props_; }

    /// D x M block of class c.
    auto block(std::size_t c) {
        return flat_.middleCols(static_cast<Eigen::Index>(c * num_props_),
                                static_cast<Eigen::Index>(num_props_));
    }
    auto block(std::size_t c) const {
        return flat_.middleCols(static_cast<Eigen::Index>(c * num_props_),
                                static_cast<Eigen::Index>(num_props_));
    }

    /// D x (C*M); column c*M + m is property m of class c.
    const Eigen::MatrixXd& flat() const { return flat_; }
    Eigen::MatrixXd& flat() { return flat_; }

    /// Update blocks skipped because their norm was zero.
    std::size_t skipped_updates() const { return skipped_updates_; }
    void count_skipped() { ++skipped_updates_; }

    /// FNV-1a over the raw bytes of every entry.
    std::uint64_t checksum() const;

private:
    Eigen::MatrixXd flat_;
    std::size_t num_classes_ = 0;
    std::size_t num_props_ = 0;
    std::size_t skipped_updates_ = 0;
};

struct RelationMatrix {
    Eigen::MatrixXd values;  // (C*M) x C

    /// Zero-mean Gaussian, stddev 1/sqrt(C*M).
    static RelationMatrix random(std::size_t num_classes, std::size_t num_props, Rng& rng);
};

/// G = F A, stored flat as N x (C*M).
struct GeometryEmbedding {
    Eigen::MatrixXd values;
    std::size_t num_classes = 0;
    std::size_t num_props = 0;

    double at(std::size_t n, std::size_t c, std::size_t m) const {
        return values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c * num_props + m));
    }
};

GeometryEmbedding embed(const Eigen::Ref<const FeatureMatrix>& features, const EmbeddingMatrix& A);

/// Transport plan for class c over the given points (typically the reliable
/// points of c). Returns nullopt when `points` is empty.
std::optional<sinkhorn::TransportPlan> class_plan(const GeometryEmbedding& G,
                                                  std::span<const std::size_t> points,
                                                  std::size_t c,
                                                  const sinkhorn::SinkhornConfig& cfg);

/// Same, over every point labeled c.
std::optional<sinkhorn::TransportPlan> class_plan(const GeometryEmbedding& G, const LabelSet& labels,
                                                  std::size_t c,
                                                  const sinkhorn::SinkhornConfig& cfg);

/// F[reliable]^T W* (D x M). nullopt when `reliable` is empty.
std::optional<Eigen::MatrixXd> class_update(const Eigen::Ref<const FeatureMatrix>& features,
                                            const sinkhorn::TransportPlan& plan,
                                            std::span<const std::size_t> reliable);

/// Points with label == prediction == c.
std::vector<std::size_t> reliable_points(const LabelSet& labels,
                                         std::span<const std::uint32_t> predictions, std::size_t c);

/// Points with label == c.
std::vector<std::size_t> labeled_points(const LabelSet& labels, std::size_t c);

struct MomentumReport {
    std::size_t updated = 0;
    std::size_t skipped = 0;
};

/// A_c <- eps A_c + (1 - eps) U_c / ||U_c||_F for every class in `updates`.
/// Zero-norm updates are skipped and counted on A.
MomentumReport momentum_update(EmbeddingMatrix& A,
                               const std::map<std::size_t, Eigen::MatrixXd>& updates,
                               double epsilon);

/// Cross-entropy of softmax(G_flat Q) against the labels, averaged over
/// non-ignored points, with gradients for G and Q.
struct GeometryLoss {
    double value = 0.0;
    std::size_t count = 0;
    Eigen::MatrixXd grad_embedding;  // N x (C*M)
    Eigen::MatrixXd grad_relation;   // (C*M) x C
    Eigen::MatrixXd grad_features;   // N x D; filled only by the feature-level entry points

    bool empty() const { return count == 0; }
};

/// Logits G_flat Q.
Eigen::MatrixXd geometry_logits(const GeometryEmbedding& G, const RelationMatrix& Q);

GeometryLoss gpl_loss(const GeometryEmbedding& G, const RelationMatrix& Q, const LabelSet& labels);

/// gpl_loss(embed(F, A), Q, labels) with the gradient carried back to F.
/// A is a constant here.
GeometryLoss geometry_loss(const Eigen::Ref<const FeatureMatrix>& features, const EmbeddingMatrix& A,
                           const RelationMatrix& Q, const LabelSet& labels);

/// Consistency loss: augmented features embedded with the A built from the
/// original features, scored against the augmented labels.
inline GeometryLoss gcl_loss(const Eigen::Ref<const FeatureMatrix>& augmented,
                             const EmbeddingMatrix& A, const RelationMatrix& Q,
                             const LabelSet& augmented_labels) {
    return geometry_loss(augmented, A, Q, augmented_labels);
}

}  // namespace catgeo::cge
