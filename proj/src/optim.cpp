#include "seled/optim.hpp"

#include <cmath>

namespace seled {

LeastSquaresResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0,
                                       const LeastSquaresOptions& opts) {
    const auto n = x0.size();
    Eigen::VectorXd x = x0;
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    fn(x, r, &J);
    double cost = r.squaredNorm();
    double lambda = opts.initial_lambda;

    LeastSquaresResult out;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        Eigen::MatrixXd jtj = J.transpose() * J;
        Eigen::VectorXd jtr = J.transpose() * r;
        bool stepped = false;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal().array() += lambda * (jtj.diagonal().array().abs() + 1e-12);
            Eigen::VectorXd step = damped.ldlt().solve(-jtr);
            Eigen::VectorXd xt = x + step;
            Eigen::VectorXd rt;
            fn(xt, rt, nullptr);
            double ct = rt.squaredNorm();
            if (ct < cost) {
                double rel_step = step.norm() / (x.norm() + 1e-12);
                x = xt;
                fn(x, r, &J);
                cost = r.squaredNorm();
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (rel_step < opts.step_tolerance) {
                    out.converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if (out.converged || !stepped) {
            if (!stepped) out.converged = true;  // no descent direction left
            ++it;
            break;
        }
    }

    out.x = x;
    out.residual_norm = std::sqrt(cost);
    out.iterations = it;
    Eigen::MatrixXd jtj = J.transpose() * J;
    jtj.diagonal().array() += 1e-300;
    out.covariance = jtj.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
    return out;
}

LeastSquaresResult levenberg_marquardt_fd(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x0, const LeastSquaresOptions& opts) {
    ResidualFn wrapped = [&fn](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                               Eigen::MatrixXd* J) {
        fn(x, r);
        if (J == nullptr) return;
        const auto n = x.size();
        J->resize(r.size(), n);
        Eigen::VectorXd xp = x;
        Eigen::VectorXd rp;
        for (Eigen::Index j = 0; j < n; ++j) {
            double h = 1e-7 * (std::abs(x[j]) + 1.0);
            xp[j] = x[j] + h;
            fn(xp, rp);
            J->col(j) = (rp - r) / h;
            xp[j] = x[j];
        }
    };
    return levenberg_marquardt(wrapped, x0, opts);
}

namespace {

Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h0) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double h = h0 * (std::abs(x[j]) + 1.0);
        xp[j] = x[j] + h;
        double fp = f(xp);
        xp[j] = x[j] - h;
        double fm = f(xp);
        xp[j] = x[j];
        g[j] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace

MinimizeResult bfgs_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const MinimizeOptions& opts) {
    const auto n = x0.size();
    Eigen::VectorXd x = x0;
    double fx = f(x);
    Eigen::VectorXd g = central_gradient(f, x, opts.finite_diff_step);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);  // inverse Hessian approx

    MinimizeResult out;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        if (g.norm() < opts.gradient_tolerance) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd d = -H * g;
        if (d.dot(g) >= 0.0) {  // lost positive definiteness; reset
            H.setIdentity();
            d = -g;
        }

        // Backtracking Armijo line search.
        double t = 1.0;
        double slope = g.dot(d);
        Eigen::VectorXd xt;
        double ft = fx;
        bool ok = false;
        for (int ls = 0; ls < 50; ++ls) {
            xt = x + t * d;
            ft = f(xt);
            if (ft <= fx + 1e-4 * t * slope) {
                ok = true;
                break;
            }
            t *= 0.5;
        }
        if (!ok) break;  // cannot decrease further at this resolution

        Eigen::VectorXd gt = central_gradient(f, xt, opts.finite_diff_step);
        Eigen::VectorXd s = xt - x;
        Eigen::VectorXd y = gt - g;
        double sy = s.dot(y);
        if (sy > 1e-12) {
            Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            H = (I - s * y.transpose() / sy) * H * (I - y * s.transpose() / sy) +
                s * s.transpose() / sy;
        }
        x = xt;
        fx = ft;
        g = gt;
    }

    out.x = x;
    out.value = fx;
    out.gradient_norm = g.norm();
    out.iterations = it;
    if (g.norm() < opts.gradient_tolerance) out.converged = true;
    return out;
}

}  // namespace seled
