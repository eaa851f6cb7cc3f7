#include "catgeo/losses.hpp"

#include <cmath>
#include <string>

namespace catgeo {

Eigen::MatrixXd softmax_rows(const Eigen::Ref<const Eigen::MatrixXd>& logits) {
    Eigen::MatrixXd p = logits.colwise() - logits.rowwise().maxCoeff();
    p = p.array().exp();
    p.array().colwise() /= p.rowwise().sum().array();
    return p;
}

CrossEntropy softmax_cross_entropy(const Eigen::Ref<const Eigen::MatrixXd>& logits,
                                   const LabelSet& labels) {
    const auto n = static_cast<std::size_t>(logits.rows());
    const auto num_classes = static_cast<std::size_t>(logits.cols());
    if (labels.size() != n)
        throw DimensionError("cross entropy: " + std::to_string(n) + " logit rows but " +
                             std::to_string(labels.size()) + " labels");
    CrossEntropy out;
    out.grad_logits = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < n; ++i) {
        if (!labels.is_ignored(i)) {
            if (labels.labels[i] >= num_classes)
                throw DimensionError("cross entropy: label " + std::to_string(labels.labels[i]) +
                                     " >= " + std::to_string(num_classes) + " classes");
            ++out.count;
        }
    }
    if (out.count == 0) return out;

    const double inv = 1.0 / static_cast<double>(out.count);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels.is_ignored(i)) continue;
        const auto row = logits.row(static_cast<Eigen::Index>(i));
        const double mx = row.maxCoeff();
        const Eigen::RowVectorXd e = (row.array() - mx).exp();
        const double z = e.sum();
        const auto y = static_cast<Eigen::Index>(labels.labels[i]);
        total += std::log(z) - (row(y) - mx);
        auto g = out.grad_logits.row(static_cast<Eigen::Index>(i));
        g = e * (inv / z);
        g(y) -= inv;
    }
    out.value = total * inv;
    return out;
}

}  // namespace catgeo
