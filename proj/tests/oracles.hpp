#pragma once

// Deliberately naive re-implementations used as references in tests.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "catgeo/cge.hpp"
#include "catgeo/model.hpp"

namespace catgeo::testing {

/// Plain exp-domain Sinkhorn in long double, u <- a / Kv, v <- b / K^T u.
inline Eigen::MatrixXd sinkhorn_oracle(const Eigen::MatrixXd& cost, double sigma, int iters, double tol) {
    const long n = cost.rows(), m = cost.cols();
    std::vector<long double> K(static_cast<std::size_t>(n * m)), u(n, 1.0L), v(m, 1.0L);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < m; ++j) K[i * m + j] = std::exp(-static_cast<long double>(cost(i, j)) / sigma);
    const long double a = 1.0L / n, b = 1.0L / m;
    for (int it = 0; it < iters; ++it) {
        for (long i = 0; i < n; ++i) {
            long double s = 0;
            for (long j = 0; j < m; ++j) s += K[i * m + j] * v[j];
            u[i] = a / s;
        }
        for (long j = 0; j < m; ++j) {
            long double s = 0;
            for (long i = 0; i < n; ++i) s += K[i * m + j] * u[i];
            v[j] = b / s;
        }
        long double err = 0;
        for (long i = 0; i < n; ++i) {
            long double s = 0;
            for (long j = 0; j < m; ++j) s += u[i] * K[i * m + j] * v[j];
            err += std::fabs(s - a);
        }
        if (err < tol) break;
    }
    Eigen::MatrixXd P(n, m);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < m; ++j) P(i, j) = static_cast<double>(u[i] * K[i * m + j] * v[j]);
    return P;
}

/// Mean of -log softmax over non-ignored rows, one scalar at a time.
inline double cross_entropy_oracle(const Eigen::MatrixXd& logits, const std::vector<std::uint32_t>& labels) {
    double total = 0;
    int count = 0;
    for (long n = 0; n < logits.rows(); ++n) {
        if (labels[n] == kIgnoreLabel) continue;
        double mx = -1e300;
        for (long c = 0; c < logits.cols(); ++c) mx = std::max(mx, logits(n, c));
        double z = 0;
        for (long c = 0; c < logits.cols(); ++c) z += std::exp(logits(n, c) - mx);
        total += -(logits(n, labels[n]) - mx - std::log(z));
        ++count;
    }
    return count ? total / count : 0.0;
}

/// G[n, c*M + m] = sum_d F[n, d] A_c[d, m].
inline Eigen::MatrixXd embed_oracle(const Eigen::MatrixXd& F, const cge::EmbeddingMatrix& A) {
    const std::size_t C = A.num_classes(), M = A.num_props(), D = A.feature_dim();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(F.rows(), static_cast<long>(C * M));
    for (long n = 0; n < F.rows(); ++n)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t m = 0; m < M; ++m) {
                double s = 0;
                for (std::size_t d = 0; d < D; ++d) s += F(n, static_cast<long>(d)) * A.block(c)(d, m);
                G(n, static_cast<long>(c * M + m)) = s;
            }
    return G;
}

/// Scalar forward pass of one point through the network.
inline std::pair<std::vector<double>, std::vector<double>> forward_oracle(const model::PointNetLite& net,
                                                                          const Point& p) {
    std::vector<double> h = {p.x / model::kSceneScale, p.y / model::kSceneScale, p.z / model::kSceneScale,
                             static_cast<double>(p.intensity)};
    for (const auto& layer : net.layers()) {
        std::vector<double> next(layer.out_dim());
        for (std::size_t o = 0; o < layer.out_dim(); ++o) {
            double s = layer.bias(static_cast<long>(o));
            for (std::size_t i = 0; i < layer.in_dim(); ++i) s += layer.weight(static_cast<long>(o), static_cast<long>(i)) * h[i];
            next[o] = std::tanh(s);
        }
        h = std::move(next);
    }
    std::vector<double> logits(net.num_classes());
    for (std::size_t o = 0; o < logits.size(); ++o) {
        double s = net.head().bias(static_cast<long>(o));
        for (std::size_t i = 0; i < h.size(); ++i) s += net.head().weight(static_cast<long>(o), static_cast<long>(i)) * h[i];
        logits[o] = s;
    }
    return {h, logits};
}

}  // namespace catgeo::testing
