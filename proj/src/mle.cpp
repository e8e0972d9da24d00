#include "mle.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace qst {

namespace {

void require_compatible(const MeasurementRecord& record,
                        const ProjectorSet& projectors) {
  if (record.qubits != projectors.qubits ||
      record.values.size() != projectors.count())
    fail(Error::Code::dimension_mismatch,
         "measurement record and projector set have different dimensions");
}

// Shared evaluation of the likelihood and, when grad != nullptr, its
// gradient. For rho = M/tr with M = T^dag T:
//   d Tr(M P)/d Re T_rc = 2 Re (T P)_rc,   d/d Im T_rc = 2 Im (T P)_rc,
// so one weighted projector sum W = sum_i w_i P_i collapses the gradient to
// a single product T W.
double nll_impl(const TauVector& tau, const MeasurementRecord& record,
                const ProjectorSet& projectors, double denom_floor,
                RVector* grad) {
  require_compatible(record, projectors);
  if (tau.qubits != record.qubits)
    fail(Error::Code::dimension_mismatch,
         "tau and measurement record have different qubit counts");
  if (!(denom_floor > 0.0))
    fail(Error::Code::invalid_argument, "denominator floor must be positive");

  const CMatrix factor = tau_to_factor(tau);
  const CMatrix gram = factor.adjoint() * factor;
  const double trace = gram.trace().real();
  if (!(trace > 0.0))
    fail(Error::Code::invalid_argument,
         "degenerate parameter vector: tau has zero norm");

  const int n = projectors.count();
  CMatrix weighted;
  if (grad) weighted = CMatrix::Zero(gram.rows(), gram.cols());
  double weighted_prob_sum = 0.0;

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const CMatrix& proj = projectors.projectors[i];
    const double p = real_trace_product(gram, proj) / trace;
    const double residual = p - record.values(i);
    if (p > denom_floor) {
      total += residual * residual / (2.0 * p);
      if (grad) {
        const double w = residual / p - residual * residual / (2.0 * p * p);
        weighted += w * proj;
        weighted_prob_sum += w * p;
      }
    } else {
      total += residual * residual / (2.0 * denom_floor);
      if (grad) {
        const double w = residual / denom_floor;
        weighted += w * proj;
        weighted_prob_sum += w * p;
      }
    }
  }

  if (grad) {
    const CMatrix product = factor * weighted;
    const int dim = static_cast<int>(factor.rows());
    grad->resize(tau.values.size());
    auto component = [&](int r, int c, bool imag_part) {
      const double ds = 2.0 * (imag_part ? product(r, c).imag()
                                         : product(r, c).real());
      const double dtr = 2.0 * (imag_part ? factor(r, c).imag()
                                          : factor(r, c).real());
      return (ds - weighted_prob_sum * dtr) / trace;
    };
    for (int i = 0; i < dim; ++i) (*grad)(i) = component(i, i, false);
    Eigen::Index k = dim;
    for (int r = 1; r < dim; ++r)
      for (int c = 0; c < r; ++c) {
        (*grad)(k) = component(r, c, false);
        (*grad)(k + 1) = component(r, c, true);
        k += 2;
      }
  }
  return total;
}

}  // namespace

double nll(const TauVector& tau, const MeasurementRecord& record,
           const ProjectorSet& projectors, double denom_floor) {
  return nll_impl(tau, record, projectors, denom_floor, nullptr);
}

RVector nll_gradient(const TauVector& tau, const MeasurementRecord& record,
                     const ProjectorSet& projectors, double denom_floor) {
  RVector grad;
  nll_impl(tau, record, projectors, denom_floor, &grad);
  return grad;
}

MleResult reconstruct_mle(const MeasurementRecord& record,
                          const ProjectorSet& projectors,
                          const MleConfig& config, Rng& rng) {
  require_compatible(record, projectors);
  if (config.restarts < 1)
    fail(Error::Code::invalid_argument, "restarts must be at least 1");

  const int qubits = record.qubits;
  const Eigen::Index tau_len =
      Eigen::Index(dimension(qubits)) * dimension(qubits);
  const double scale = config.init_scale > 0.0
                           ? config.init_scale
                           : std::sqrt(6.0 / (2.0 * double(tau_len)));

  const auto t_start = std::chrono::steady_clock::now();

  ObjectiveWithGradient objective = [&](const RVector& x, RVector& grad) {
    TauVector tau{qubits, x};
    return nll_impl(tau, record, projectors, config.denom_floor, &grad);
  };

  BfgsOptions options;
  options.grad_tolerance = config.grad_tolerance;
  options.max_iterations = config.max_iterations;

  bool have_best = false;
  BfgsResult best;
  for (int restart = 0; restart < config.restarts; ++restart) {
    RVector x0(tau_len);
    for (Eigen::Index i = 0; i < tau_len; ++i)
      x0(i) = rng.uniform_in(-scale, scale);
    try {
      BfgsResult run = bfgs_minimize(objective, x0, options);
      if (!std::isfinite(run.value)) continue;
      if (!have_best || run.value < best.value) {
        best = std::move(run);
        have_best = true;
      }
    } catch (const Error&) {
      // Non-finite start or a stalled line search: a failed restart.
      continue;
    }
  }
  if (!have_best)
    fail(Error::Code::optimization,
         "all " + std::to_string(config.restarts) +
             " restarts diverged or stalled");

  const auto t_end = std::chrono::steady_clock::now();

  MleResult result;
  result.tau = TauVector{qubits, best.x / best.x.norm()};
  result.rho = density_from_tau(result.tau);
  result.nll = best.value;
  result.iterations = best.iterations;
  result.converged = best.converged;
  result.wall_time_seconds =
      std::chrono::duration<double>(t_end - t_start).count();
  return result;
}

}  // namespace qst
