#pragma once

#include "bfgs.hpp"
#include "measurement.hpp"
#include "qstate.hpp"
#include "rng.hpp"

namespace qst {

struct MleConfig {
  double grad_tolerance = 1e-8;
  int max_iterations = 500;
  double denom_floor = 1e-9;
  // <= 0 selects sqrt(6 / (2 * 4^d)), a Glorot-style scale over the flat
  // parameter vector.
  double init_scale = 0.0;
  int restarts = 3;
};

struct MleResult {
  DensityMatrix rho;
  TauVector tau;
  double nll = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_time_seconds = 0.0;
};

// Gaussian negative log-likelihood over the tau parameterization:
//   sum_i (Tr(rho(tau) P_i) - m_i)^2 / (2 max(Tr(rho(tau) P_i), floor)).
// Invariant under tau -> c tau for c != 0.
double nll(const TauVector& tau, const MeasurementRecord& record,
           const ProjectorSet& projectors, double denom_floor = 1e-9);

// Analytic gradient of nll, propagated through rho = T^dag T / Tr(T^dag T).
RVector nll_gradient(const TauVector& tau, const MeasurementRecord& record,
                     const ProjectorSet& projectors,
                     double denom_floor = 1e-9);

// BFGS from `restarts` uniform random initializations; returns the run with
// the lowest final nll. converged is true iff the winning run met the
// gradient tolerance.
MleResult reconstruct_mle(const MeasurementRecord& record,
                          const ProjectorSet& projectors,
                          const MleConfig& config, Rng& rng);

}  // namespace qst
