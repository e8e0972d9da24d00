#pragma once

#include <functional>

#include "qstate.hpp"

namespace qst {

// Objective callback: returns f(x) and fills grad (resized by the caller).
using ObjectiveWithGradient =
    std::function<double(const RVector& x, RVector& grad)>;

struct BfgsOptions {
  double grad_tolerance = 1e-8;  // infinity norm of the gradient
  int max_iterations = 500;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search_failures = 20;  // consecutive, then Error::optimization
};

struct BfgsResult {
  RVector x;
  double value = 0.0;
  RVector gradient;
  int iterations = 0;
  bool converged = false;
};

// Dense BFGS with an inverse-Hessian update and a strong-Wolfe line search.
// Accepted steps are monotone non-increasing in f; the inverse-Hessian update
// is skipped when the curvature condition y^T s <= 1e-12 fails. Throws
// Error::Code::optimization after max_line_search_failures consecutive
// line-search failures (callers treat this as a non-converged restart).
BfgsResult bfgs_minimize(
    const ObjectiveWithGradient& objective, const RVector& x0,
    const BfgsOptions& options = {},
    const std::function<void(int iteration, const RVector& x, double value)>&
        on_accept = nullptr);

// Spec-shaped convenience overload.
BfgsResult bfgs_minimize(const ObjectiveWithGradient& objective,
                         const RVector& x0, double tolerance,
                         int max_iterations);

}  // namespace qst
