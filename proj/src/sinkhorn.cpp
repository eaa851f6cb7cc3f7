#include "catgeo/sinkhorn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace catgeo::sinkhorn {
namespace {

// log(sum_k exp(x_k)) for a strided view.
template <typename Vec>
double log_sum_exp(const Vec& x) {
    const double mx = x.maxCoeff();
    if (!std::isfinite(mx)) return mx;
    return mx + std::log((x.array() - mx).exp().sum());
}

}  // namespace

void SinkhornConfig::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("sinkhorn: sigma must be > 0");
    if (max_iters < 1) throw std::invalid_argument("sinkhorn: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("sinkhorn: tol must be > 0");
}

TransportPlan solve(const Eigen::Ref<const Eigen::MatrixXd>& cost, const SinkhornConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = cost.rows();
    const Eigen::Index m = cost.cols();
    if (n < 1 || m < 1) throw std::invalid_argument("sinkhorn: cost must be at least 1x1");
    if (!cost.allFinite()) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                if (!std::isfinite(cost(i, j)))
                    throw std::invalid_argument("sinkhorn: non-finite cost at (" + std::to_string(i) +
                                                ", " + std::to_string(j) + ")");
    }

    const double log_a = -std::log(static_cast<double>(n));
    const double log_b = -std::log(static_cast<double>(m));
    const double scale = (cfg.negate_cost ? 1.0 : -1.0) / cfg.sigma;
    const Eigen::MatrixXd log_kernel = cost * scale;

    Eigen::VectorXd log_u = Eigen::VectorXd::Constant(n, log_a);
    Eigen::VectorXd log_v = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd row_lse(n);
    Eigen::MatrixXd work(n, m);

    TransportPlan out;
    out.iters_used = 0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        work = log_kernel.rowwise() + log_v.transpose();
        for (Eigen::Index i = 0; i < n; ++i) row_lse(i) = log_sum_exp(work.row(i));
        if (it > 0) {
            // Column marginals are exact after the previous v-update, so the
            // row residual of the current (u, v) is the whole residual.
            const double row_residual =
                ((log_u + row_lse).array().exp() - std::exp(log_a)).abs().sum();
            if (row_residual < cfg.tol) break;
        }
        log_u = log_a - row_lse.array();
        work = log_kernel.colwise() + log_u;
        for (Eigen::Index j = 0; j < m; ++j) log_v(j) = log_b - log_sum_exp(work.col(j));
        out.iters_used = it + 1;
    }

    out.plan = ((log_kernel.colwise() + log_u).rowwise() + log_v.transpose()).array().exp();
    out.row_marginal = Eigen::VectorXd::Constant(n, std::exp(log_a));
    out.col_marginal = Eigen::VectorXd::Constant(m, std::exp(log_b));
    out.residual = plan_marginal_residual(out);
    return out;
}

double plan_marginal_residual(const TransportPlan& plan) {
    const Eigen::VectorXd rows = plan.plan.rowwise().sum();
    const Eigen::VectorXd cols = plan.plan.colwise().sum().transpose();
    return (rows - plan.row_marginal).lpNorm<1>() + (cols - plan.col_marginal).lpNorm<1>();
}

}  // namespace catgeo::sinkhorn
