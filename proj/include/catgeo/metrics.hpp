#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "catgeo/model.hpp"
#include "catgeo/types.hpp"

namespace catgeo::metrics {

/// Rows are ground truth, columns predictions. Ignored ground truth is
/// never counted.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes);

    void add(const LabelSet& truth, std::span<const std::uint32_t> predictions);

    std::size_t num_classes() const { return num_classes_; }
    std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * num_classes_ + pred]; }
    std::uint64_t support(std::size_t c) const;

    /// TP / (TP + FP + FN); nullopt when class c has no ground-truth points.
    std::optional<double> iou(std::size_t c) const;
    /// Mean IoU over classes with ground truth; nullopt if there are none.
    std::optional<double> miou() const;

private:
    std::size_t num_classes_;
    std::vector<std::uint64_t> counts_;
};

struct MetricsReport {
    std::vector<std::string> class_names;
    std::vector<std::optional<double>> iou;
    double miou = 0.0;
    std::uint64_t points = 0;
    /// Extra named values (per-condition mIoU, final losses).
    std::vector<std::pair<std::string, double>> extra;

    /// One `name = value` line per metric.
    std::string to_text() const;
};

MetricsReport report_from(const ConfusionMatrix& cm, const ClassTable& table);

/// Average of softmax probabilities over every (angle, scale) pair.
Eigen::MatrixXd tta_probabilities(const model::PointNetLite& net, const PointCloud& cloud,
                                  std::span<const double> angles_deg, std::span<const double> scales);

std::vector<std::uint32_t> argmax_rows(const Eigen::Ref<const Eigen::MatrixXd>& scores);

struct TtaGrid {
    std::vector<double> angles_deg;
    std::vector<double> scales;
};

/// Argmax predictions over each scene, accumulated into one confusion
/// matrix. Uses TTA when `tta` is set. Throws on an empty scene list or a
/// class-count mismatch.
MetricsReport evaluate(const model::PointNetLite& net, std::span<const Scene> scenes, const ClassTable& table,
                       const std::optional<TtaGrid>& tta = std::nullopt);

}  // namespace catgeo::metrics
