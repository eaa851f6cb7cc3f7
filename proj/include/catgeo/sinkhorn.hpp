#pragma once

#include <Eigen/Dense>

namespace catgeo::sinkhorn {

struct SinkhornConfig {
    double sigma = 0.05;   // entropic regularization
    int max_iters = 200;
    double tol = 1e-8;     // L1 marginal residual
    /// Solve with -cost instead of cost (maximize alignment rather than
    /// minimize). Off by default.
    bool negate_cost = false;

    void validate() const;
};

struct TransportPlan {
    Eigen::MatrixXd plan;
    Eigen::VectorXd row_marginal;
    Eigen::VectorXd col_marginal;
    int iters_used = 0;
    double residual = 0.0;

    bool converged(double tol) const { return residual < tol; }
};

/// Entropic OT between uniform marginals (1/n, 1/m) for an n x m cost.
/// Iterates the scaling vectors in log space, so small sigma does not
/// underflow the Gibbs kernel. Non-convergence is reported through
/// `residual`, not thrown.
TransportPlan solve(const Eigen::Ref<const Eigen::MatrixXd>& cost, const SinkhornConfig& cfg = {});

/// ||rowsums - a||_1 + ||colsums - b||_1.
double plan_marginal_residual(const TransportPlan& plan);

}  // namespace catgeo::sinkhorn
