#pragma once

#include <functional>

#include <Eigen/Dense>

namespace seled {

// f(x, residuals, jacobian); jacobian may be null when not requested.
using ResidualFn =
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd*)>;

struct LeastSquaresResult {
    Eigen::VectorXd x;
    Eigen::MatrixXd covariance;  // (J^T J)^-1 at the optimum
    double residual_norm = 0.0;  // sqrt(sum of squared residuals)
    int iterations = 0;
    bool converged = false;
};

struct LeastSquaresOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-9;  // relative step size
    double initial_lambda = 1e-3;
};

// Damped Gauss-Newton (Levenberg-style) over analytic Jacobians.
// Never throws on non-convergence; the caller inspects `converged` and
// decides whether best-so-far parameters are usable.
LeastSquaresResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0,
                                       const LeastSquaresOptions& opts = {});

// Convenience for residual functions without analytic Jacobians: forward
// differences with per-parameter relative step 1e-7.
LeastSquaresResult levenberg_marquardt_fd(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x0, const LeastSquaresOptions& opts = {});

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct MinimizeOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;
    double finite_diff_step = 1e-6;
};

// BFGS with backtracking line search; gradient by central differences.
MinimizeResult bfgs_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const MinimizeOptions& opts = {});

}  // namespace seled
