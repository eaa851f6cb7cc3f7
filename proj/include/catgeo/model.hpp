#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "catgeo/cge.hpp"
#include "catgeo/losses.hpp"
#include "catgeo/rng.hpp"
#include "catgeo/types.hpp"

namespace catgeo::model {

/// Coordinates are divided by this before entering the network.
inline constexpr double kSceneScale = 50.0;

struct Dense {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out

    std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

/// Per-point network: tanh layers `widths[0] -> ... -> widths.back()` produce
/// the D-dimensional features F, and a linear head maps F to C logits. No
/// information flows between points.
class PointNetLite {
public:
    PointNetLite() = default;
    /// All-zero parameters. `widths` starts with the input width (4).
    PointNetLite(const std::vector<std::size_t>& widths, std::size_t num_classes);
    /// Gaussian weights with stddev 1/sqrt(fan_in), zero biases.
    static PointNetLite random(const std::vector<std::size_t>& widths, std::size_t num_classes, Rng& rng);

    std::size_t input_dim() const { return layers_.front().in_dim(); }
    std::size_t feature_dim() const { return head_.in_dim(); }
    std::size_t num_classes() const { return head_.out_dim(); }
    std::vector<std::size_t> widths() const;

    const std::vector<Dense>& layers() const { return layers_; }
    std::vector<Dense>& layers() { return layers_; }
    const Dense& head() const { return head_; }
    Dense& head() { return head_; }

    /// Flat views of every parameter tensor in declaration order
    /// (layer weights and biases, then the head).
    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> parameters() const;

private:
    std::vector<Dense> layers_;
    Dense head_;
};

/// N x 4 network input (x, y, z scaled by 1/kSceneScale, intensity).
Eigen::MatrixXd encode_inputs(const PointCloud& cloud);

/// Saved activations of one forward pass. `activations[l]` is the output of
/// layer l; the last one is the feature matrix F.
struct ForwardPass {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> activations;
    Eigen::MatrixXd logits;

    const Eigen::MatrixXd& features() const { return activations.back(); }
    std::vector<std::uint32_t> predictions() const;
};

ForwardPass forward(const PointNetLite& model, const PointCloud& cloud);
ForwardPass forward(const PointNetLite& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs);

/// Segmentation cross-entropy, mean over non-ignored points.
inline CrossEntropy seg_loss(const Eigen::Ref<const Eigen::MatrixXd>& logits, const LabelSet& labels) {
    return softmax_cross_entropy(logits, labels);
}

/// Gradients mirroring the trainable state: network parameters plus Q.
struct Gradients {
    std::vector<Dense> layers;
    Dense head;
    Eigen::MatrixXd relation;

    static Gradients zeros_like(const PointNetLite& model, const cge::RelationMatrix& Q);
    std::vector<std::span<double>> views();
    std::vector<std::span<const double>> views() const;
};

/// Opaque handle tying a loss total to the tape that produced it.
struct TotalLoss {
    double value = 0.0;
    const void* tape = nullptr;
    std::uint64_t generation = 0;
};

/// Records forward passes and weighted loss terms, then replays them in
/// reverse to produce exact gradients for the network and Q. The embedding
/// matrix A only ever enters as a constant.
class GradientTape {
public:
    GradientTape(const PointNetLite& model, const cge::RelationMatrix& Q);
    GradientTape(const GradientTape&) = delete;
    GradientTape& operator=(const GradientTape&) = delete;

    /// Runs and records a forward pass; returns its index.
    std::size_t record(const PointCloud& cloud);
    const ForwardPass& pass(std::size_t id) const { return passes_.at(id).fwd; }

    /// Adds weight * L_seg(pass logits). Returns the unweighted value.
    CrossEntropy add_seg_loss(std::size_t id, const LabelSet& labels, double weight);
    /// Adds weight * L_geo(pass features through A and Q). Returns the
    /// unweighted value.
    cge::GeometryLoss add_geometry_loss(std::size_t id, const cge::EmbeddingMatrix& A,
                                        const LabelSet& labels, double weight);

    TotalLoss total() const { return {total_, this, generation_}; }

    /// Throws std::logic_error if `total` was not produced by this tape in
    /// its current state.
    Gradients backward(const TotalLoss& total) const;

private:
    struct Entry {
        ForwardPass fwd;
        Eigen::MatrixXd grad_logits;    // empty until seeded
        Eigen::MatrixXd grad_features;  // empty until seeded
    };

    const PointNetLite& model_;
    const cge::RelationMatrix& relation_;
    std::vector<Entry> passes_;
    Eigen::MatrixXd grad_relation_;
    double total_ = 0.0;
    std::uint64_t generation_ = 0;
};

struct SgdState {
    double lr = 0.24;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::vector<std::vector<double>> velocity;
};

/// v <- momentum v + g + wd p; p <- p - lr v, for every tensor. Returns
/// false and leaves everything untouched if any gradient is non-finite.
[[nodiscard]] bool sgd_step(SgdState& state, std::span<const std::span<double>> params,
                            std::span<const std::span<const double>> grads);

/// Parameters and Q as one list, matching Gradients::views() order.
std::vector<std::span<double>> trainable(PointNetLite& model, cge::RelationMatrix& Q);

// Checkpoint: "GSEG", version byte, u32 header (input width, hidden layer
// count, every layer width, D, C, M), then little-endian float64 arrays in
// declaration order: each layer's weight (row-major) and bias, head weight
// and bias, Q (row-major), and the C blocks of A (each D x M row-major).
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct Checkpoint {
    PointNetLite model;
    cge::RelationMatrix relation;
    cge::EmbeddingMatrix embedding;
};

std::vector<std::byte> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::byte> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace catgeo::model
