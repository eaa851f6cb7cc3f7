#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "catgeo/types.hpp"

namespace catgeo {

/// Row-wise softmax over the class dimension, max-shifted.
Eigen::MatrixXd softmax_rows(const Eigen::Ref<const Eigen::MatrixXd>& logits);

/// Mean softmax cross-entropy over the non-ignored rows and its gradient
/// with respect to the logits. `count` is the number of scored rows; when it
/// is zero the loss is empty: value 0 and an all-zero gradient.
struct CrossEntropy {
    double value = 0.0;
    std::size_t count = 0;
    Eigen::MatrixXd grad_logits;

    bool empty() const { return count == 0; }
};

CrossEntropy softmax_cross_entropy(const Eigen::Ref<const Eigen::MatrixXd>& logits,
                                   const LabelSet& labels);

}  // namespace catgeo
