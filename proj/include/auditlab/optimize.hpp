#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace auditlab {

struct OptimOptions {
  double grad_tol = 1e-8;   // max-norm of the gradient
  int max_iter = 500;
  // When the line search can no longer decrease the objective, a gradient
  // below this bound is accepted as converged (floating-point floor).
  double stall_grad_tol = 1e-5;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
  std::string message;
};

// f(x, grad) returns the objective and fills grad.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// BFGS on the inverse Hessian with a backtracking Armijo line search.
inline OptimResult bfgs_minimize(const Objective& f, Eigen::VectorXd x, const OptimOptions& opt = {}) {
  const auto k = x.size();
  OptimResult r;
  Eigen::VectorXd g(k), g_new(k), x_new(k);
  double fx = f(x, g);
  if (!std::isfinite(fx)) {
    r.x = x;
    r.f = fx;
    r.grad = g;
    r.message = "objective not finite at the starting point";
    return r;
  }
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(k, k);
  bool fresh = true;
  r.trace.push_back(fx);
  for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
    if (g.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      r.converged = true;
      r.message = "gradient tolerance reached";
      break;
    }
    Eigen::VectorXd d = -H * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      H.setIdentity();
      fresh = true;
      d = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * d;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!fresh) {
        H.setIdentity();
        fresh = true;
        continue;
      }
      r.converged = g.lpNorm<Eigen::Infinity>() < opt.stall_grad_tol;
      r.message = r.converged ? "line search stalled at the floating-point floor" : "line search failed";
      break;
    }
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
      fresh = false;
    }
    const double decrease = fx - f_new;
    x = x_new;
    g = g_new;
    fx = f_new;
    r.trace.push_back(fx);
    // Accepted steps whose gain is at rounding level make no real progress.
    if (decrease <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fx)) &&
        g.lpNorm<Eigen::Infinity>() < opt.stall_grad_tol && g.lpNorm<Eigen::Infinity>() >= opt.grad_tol) {
      r.converged = true;
      r.message = "objective change below floating-point resolution";
      ++r.iterations;
      break;
    }
  }
  if (r.iterations >= opt.max_iter && !r.converged) r.message = "iteration budget exhausted";
  r.x = x;
  r.f = fx;
  r.grad = g;
  return r;
}

/// Central-difference Jacobian of an analytic gradient, symmetrized.
inline Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-5) {
  const auto k = x.size();
  Eigen::MatrixXd h(k, k);
  Eigen::VectorXd gp(k), gm(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double step = rel_step * std::max(1.0, std::abs(x(i)));
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += step;
    xm(i) -= step;
    f(xp, gp);
    f(xm, gm);
    h.col(i) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

}  // namespace auditlab
