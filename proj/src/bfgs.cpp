#include "bfgs.hpp"

#include <cmath>
#include <limits>

namespace qst {

namespace {

struct LinePoint {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;  // directional derivative along the search direction
  RVector grad;
};

// Minimizer of the quadratic through (a.alpha, a.value, a.slope) and
// (b.alpha, b.value); falls back to bisection when degenerate.
double quadratic_step(const LinePoint& a, const LinePoint& b) {
  const double da = b.alpha - a.alpha;
  const double denom = 2.0 * (b.value - a.value - a.slope * da);
  double alpha = a.alpha + 0.5 * da;
  if (std::isfinite(denom) && std::abs(denom) > 1e-300) {
    const double candidate = a.alpha - a.slope * da * da / denom;
    const double lo = std::min(a.alpha, b.alpha);
    const double hi = std::max(a.alpha, b.alpha);
    const double margin = 0.1 * (hi - lo);
    if (candidate > lo + margin && candidate < hi - margin) alpha = candidate;
  }
  return alpha;
}

}  // namespace

BfgsResult bfgs_minimize(
    const ObjectiveWithGradient& objective, const RVector& x0,
    const BfgsOptions& options,
    const std::function<void(int, const RVector&, double)>& on_accept) {
  const Eigen::Index n = x0.size();
  RVector x = x0;
  RVector grad(n);
  double fx = objective(x, grad);
  if (!std::isfinite(fx))
    fail(Error::Code::numeric, "objective is not finite at the start point");

  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  RVector direction(n);

  const double c1 = options.wolfe_c1;
  const double c2 = options.wolfe_c2;
  int consecutive_failures = 0;

  BfgsResult result;
  for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
    if (grad.cwiseAbs().maxCoeff() <= options.grad_tolerance) {
      result.converged = true;
      result.iterations = iteration;
      result.x = std::move(x);
      result.value = fx;
      result.gradient = std::move(grad);
      return result;
    }

    direction = -(inv_hessian * grad);
    double slope0 = grad.dot(direction);
    if (!(slope0 < 0.0)) {
      // Not a descent direction; fall back to steepest descent.
      inv_hessian.setIdentity();
      direction = -grad;
      slope0 = grad.dot(direction);
    }

    auto eval = [&](double alpha) {
      LinePoint pt;
      pt.alpha = alpha;
      pt.grad.resize(n);
      const RVector x_trial = x + alpha * direction;
      pt.value = objective(x_trial, pt.grad);
      pt.slope = pt.grad.dot(direction);
      return pt;
    };
    auto satisfies_armijo = [&](const LinePoint& pt) {
      return std::isfinite(pt.value) &&
             pt.value <= fx + c1 * pt.alpha * slope0;
    };

    // Strong Wolfe line search: bracketing phase then zoom.
    LinePoint start;
    start.value = fx;
    start.slope = slope0;
    LinePoint prev = start;
    LinePoint found, lo, hi;
    bool have_point = false;
    bool bracketed = false;

    double alpha = 1.0;
    for (int trial = 0; trial < 12; ++trial) {
      LinePoint pt = eval(alpha);
      if (!satisfies_armijo(pt) || (trial > 0 && pt.value >= prev.value)) {
        lo = prev;
        hi = std::move(pt);
        bracketed = true;
        break;
      }
      if (std::abs(pt.slope) <= -c2 * slope0) {
        found = std::move(pt);
        have_point = true;
        break;
      }
      if (pt.slope >= 0.0) {
        hi = prev;
        lo = std::move(pt);
        bracketed = true;
        break;
      }
      prev = std::move(pt);
      alpha *= 2.0;
    }

    if (bracketed) {
      for (int zoom = 0; zoom < 30 && !have_point; ++zoom) {
        const double trial_alpha = quadratic_step(lo, hi);
        LinePoint pt = eval(trial_alpha);
        if (!satisfies_armijo(pt) ||
            (satisfies_armijo(lo) && pt.value >= lo.value)) {
          hi = std::move(pt);
        } else {
          if (std::abs(pt.slope) <= -c2 * slope0) {
            found = std::move(pt);
            have_point = true;
            break;
          }
          if (pt.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
          lo = std::move(pt);
        }
        if (std::abs(hi.alpha - lo.alpha) <
            1e-14 * std::max(1.0, std::abs(lo.alpha)))
          break;
      }
      // Curvature condition unreachable but a genuine decrease exists: take
      // the best bracketed point and let the curvature guard below decide
      // whether the inverse-Hessian update is safe.
      if (!have_point && lo.alpha > 0.0 && satisfies_armijo(lo)) {
        found = std::move(lo);
        have_point = true;
      }
    }

    if (!have_point) {
      ++consecutive_failures;
      if (consecutive_failures >= options.max_line_search_failures)
        fail(Error::Code::optimization,
             "line search stalled " + std::to_string(consecutive_failures) +
                 " consecutive times");
      inv_hessian.setIdentity();
      continue;
    }
    consecutive_failures = 0;

    const RVector step = found.alpha * direction;
    const RVector grad_delta = found.grad - grad;
    const double curvature = grad_delta.dot(step);
    if (curvature > 1e-12) {
      const double rho = 1.0 / curvature;
      const RVector h_y = inv_hessian * grad_delta;
      const double y_h_y = grad_delta.dot(h_y);
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      inv_hessian.noalias() -= rho * (h_y * step.transpose());
      inv_hessian.noalias() -= rho * (step * h_y.transpose());
      inv_hessian.noalias() +=
          (rho * rho * y_h_y + rho) * (step * step.transpose());
    }

    x += step;
    fx = found.value;
    grad = std::move(found.grad);
    if (on_accept) on_accept(iteration + 1, x, fx);
  }

  result.converged = grad.cwiseAbs().maxCoeff() <= options.grad_tolerance;
  result.iterations = options.max_iterations;
  result.x = std::move(x);
  result.value = fx;
  result.gradient = std::move(grad);
  return result;
}

BfgsResult bfgs_minimize(const ObjectiveWithGradient& objective,
                         const RVector& x0, double tolerance,
                         int max_iterations) {
  BfgsOptions options;
  options.grad_tolerance = tolerance;
  options.max_iterations = max_iterations;
  return bfgs_minimize(objective, x0, options);
}

}  // namespace qst
