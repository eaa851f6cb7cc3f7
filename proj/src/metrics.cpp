#include "catgeo/metrics.hpp"

#include <numbers>
#include <sstream>
#include <stdexcept>

#include "catgeo/losses.hpp"
#include "catgeo/pags.hpp"

namespace catgeo::metrics {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : num_classes_(num_classes), counts_(num_classes * num_classes, 0) {}

void ConfusionMatrix::add(const LabelSet& truth, std::span<const std::uint32_t> predictions) {
    if (truth.size() != predictions.size())
        throw DimensionError("confusion: " + std::to_string(truth.size()) + " labels but " +
                             std::to_string(predictions.size()) + " predictions");
    for (std::size_t n = 0; n < truth.size(); ++n) {
        const auto t = truth.labels[n];
        if (t == kIgnoreLabel) continue;
        const auto p = predictions[n];
        if (t >= num_classes_ || p >= num_classes_)
            throw DimensionError("confusion: class id out of range at point " + std::to_string(n));
        ++counts_[t * num_classes_ + p];
    }
}

std::uint64_t ConfusionMatrix::support(std::size_t c) const {
    std::uint64_t s = 0;
    for (std::size_t p = 0; p < num_classes_; ++p) s += at(c, p);
    return s;
}

std::optional<double> ConfusionMatrix::iou(std::size_t c) const {
    const std::uint64_t gt = support(c);
    if (gt == 0) return std::nullopt;
    std::uint64_t predicted = 0;
    for (std::size_t t = 0; t < num_classes_; ++t) predicted += at(t, c);
    const std::uint64_t tp = at(c, c);
    return static_cast<double>(tp) / static_cast<double>(gt + predicted - tp);
}

std::optional<double> ConfusionMatrix::miou() const {
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < num_classes_; ++c) {
        if (const auto v = iou(c)) {
            sum += *v;
            ++present;
        }
    }
    if (present == 0) return std::nullopt;
    return sum / static_cast<double>(present);
}

std::string MetricsReport::to_text() const {
    std::ostringstream os;
    os.precision(10);
    os << "miou = " << miou << '\n' << "points = " << points << '\n';
    for (std::size_t c = 0; c < iou.size(); ++c) {
        const std::string name = c < class_names.size() ? class_names[c] : std::to_string(c);
        os << "iou." << name << " = ";
        if (iou[c]) os << *iou[c];
        else os << "absent";
        os << '\n';
    }
    for (const auto& [k, v] : extra) os << k << " = " << v << '\n';
    return os.str();
}

MetricsReport report_from(const ConfusionMatrix& cm, const ClassTable& table) {
    MetricsReport r;
    r.class_names = table.names;
    for (std::size_t c = 0; c < cm.num_classes(); ++c) {
        r.iou.push_back(cm.iou(c));
        r.points += cm.support(c);
    }
    r.miou = cm.miou().value_or(0.0);
    return r;
}

std::vector<std::uint32_t> argmax_rows(const Eigen::Ref<const Eigen::MatrixXd>& scores) {
    std::vector<std::uint32_t> out(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index n = 0; n < scores.rows(); ++n) {
        Eigen::Index arg = 0;
        scores.row(n).maxCoeff(&arg);
        out[static_cast<std::size_t>(n)] = static_cast<std::uint32_t>(arg);
    }
    return out;
}

Eigen::MatrixXd tta_probabilities(const model::PointNetLite& net, const PointCloud& cloud,
                                  std::span<const double> angles_deg, std::span<const double> scales) {
    if (angles_deg.empty() || scales.empty()) throw std::invalid_argument("tta: empty transform grid");
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cloud.size()),
                                                static_cast<Eigen::Index>(net.num_classes()));
    for (double angle : angles_deg) {
        for (double scale : scales) {
            const double theta = angle * std::numbers::pi / 180.0;
            const auto fwd = model::forward(net, pags::rotate_scale(cloud, theta, scale));
            sum += softmax_rows(fwd.logits);
        }
    }
    return sum / static_cast<double>(angles_deg.size() * scales.size());
}

MetricsReport evaluate(const model::PointNetLite& net, std::span<const Scene> scenes, const ClassTable& table,
                       const std::optional<TtaGrid>& tta) {
    if (scenes.empty()) throw std::invalid_argument("evaluate: empty evaluation set");
    if (net.num_classes() != table.size())
        throw DimensionError("evaluate: model has " + std::to_string(net.num_classes()) +
                             " classes but the data has " + std::to_string(table.size()));
    ConfusionMatrix cm(table.size());
    for (const auto& scene : scenes) {
        if (tta) {
            cm.add(scene.labels, argmax_rows(tta_probabilities(net, scene.cloud, tta->angles_deg, tta->scales)));
        } else {
            cm.add(scene.labels, model::forward(net, scene.cloud).predictions());
        }
    }
    return report_from(cm, table);
}

}  // namespace catgeo::metrics
