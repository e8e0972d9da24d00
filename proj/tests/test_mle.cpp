#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bfgs.hpp"
#include "mle.hpp"

using namespace qst;

namespace {

DensityMatrix haar_density(int qubits, Rng& rng) {
  return to_density(haar_random_pure(qubits, rng));
}

DensityMatrix maximally_mixed(int qubits) {
  const int dim = 1 << qubits;
  return DensityMatrix{qubits, CMatrix::Identity(dim, dim) / double(dim)};
}

// A full-rank state: mixture of two Haar projectors and the identity.
DensityMatrix generic_mixed(int qubits, Rng& rng) {
  const DensityMatrix a = haar_density(qubits, rng);
  const DensityMatrix b = haar_density(qubits, rng);
  const int dim = 1 << qubits;
  return DensityMatrix{qubits, 0.5 * a.matrix + 0.3 * b.matrix +
                                   0.2 / dim * CMatrix::Identity(dim, dim)};
}

TauVector random_tau(int qubits, Rng& rng) {
  RVector v(1 << (2 * qubits));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform_in(-1, 1);
  return TauVector{qubits, std::move(v)};
}

// Arbitrary valid record: a random distribution per setting.
MeasurementRecord random_record(const ProjectorSet& set, Rng& rng) {
  MeasurementRecord rec;
  rec.qubits = set.qubits;
  rec.shots = kIdealShots;
  rec.values.resize(set.count());
  for (int s = 0; s < set.setting_count(); ++s) {
    double sum = 0.0;
    for (int o = 0; o < set.outcome_count(); ++o) {
      const double u = rng.uniform() + 1e-3;
      rec.values(s * set.outcome_count() + o) = u;
      sum += u;
    }
    for (int o = 0; o < set.outcome_count(); ++o)
      rec.values(s * set.outcome_count() + o) /= sum;
  }
  return rec;
}

RVector finite_difference_gradient(const TauVector& tau,
                                   const MeasurementRecord& rec,
                                   const ProjectorSet& set, double step) {
  RVector grad(tau.values.size());
  for (Eigen::Index k = 0; k < tau.values.size(); ++k) {
    TauVector hi = tau, lo = tau;
    hi.values(k) += step;
    lo.values(k) -= step;
    grad(k) = (nll(hi, rec, set) - nll(lo, rec, set)) / (2.0 * step);
  }
  return grad;
}

}  // namespace

TEST_CASE("bfgs solves an exact quadratic in a few iterations") {
  ObjectiveWithGradient f = [](const RVector& x, RVector& g) {
    g = 2.0 * x;
    return x.squaredNorm();
  };
  RVector x0(2);
  x0 << 3.0, 4.0;
  const BfgsResult r = bfgs_minimize(f, x0, 1e-8, 100);
  CHECK(r.converged);
  CHECK(r.iterations <= 3);
  CHECK(r.x.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("bfgs solves rosenbrock from the classic start") {
  ObjectiveWithGradient f = [](const RVector& x, RVector& g) {
    const double a = x(1) - x(0) * x(0);
    g.resize(2);
    g(0) = -400.0 * a * x(0) - 2.0 * (1.0 - x(0));
    g(1) = 200.0 * a;
    return 100.0 * a * a + (1.0 - x(0)) * (1.0 - x(0));
  };
  RVector x0(2);
  x0 << -1.2, 1.0;
  const BfgsResult r = bfgs_minimize(f, x0, 1e-10, 500);
  CHECK(std::abs(r.x(0) - 1.0) < 1e-5);
  CHECK(std::abs(r.x(1) - 1.0) < 1e-5);
}

TEST_CASE("bfgs accepted steps never increase the objective") {
  ObjectiveWithGradient f = [](const RVector& x, RVector& g) {
    const double a = x(1) - x(0) * x(0);
    g.resize(2);
    g(0) = -400.0 * a * x(0) - 2.0 * (1.0 - x(0));
    g(1) = 200.0 * a;
    return 100.0 * a * a + (1.0 - x(0)) * (1.0 - x(0));
  };
  RVector x0(2);
  x0 << -1.2, 1.0;
  std::vector<double> values;
  bfgs_minimize(f, x0, BfgsOptions{},
                [&](int, const RVector&, double v) { values.push_back(v); });
  REQUIRE(values.size() > 2);
  for (std::size_t i = 1; i < values.size(); ++i)
    CHECK(values[i] <= values[i - 1]);
}

TEST_CASE("bfgs reports a stall on a kink it cannot satisfy wolfe at") {
  // |x - 1/3| has slope +-1 everywhere: the curvature condition is
  // unsatisfiable and the minimizer is not representable.
  ObjectiveWithGradient f = [](const RVector& x, RVector& g) {
    g.resize(1);
    const double d = x(0) - 1.0 / 3.0;
    g(0) = d >= 0.0 ? 1.0 : -1.0;
    return std::abs(d);
  };
  RVector x0(1);
  x0 << 2.0;
  CHECK_THROWS_AS(bfgs_minimize(f, x0, 1e-8, 200), Error);
}

TEST_CASE("nll vanishes at a perfect fit") {
  const ProjectorSet set = build_projectors(2);
  Rng rng(12);
  for (int i = 0; i < 5; ++i) {
    const DensityMatrix rho = haar_density(2, rng);
    const TauVector tau = tau_from_density(rho);
    const MeasurementRecord rec = ideal_probabilities(rho, set);
    CHECK(nll(tau, rec, set) < 1e-9);
  }
  const TauVector tau_mixed = tau_from_density(maximally_mixed(2), 0.0);
  const MeasurementRecord rec_mixed =
      ideal_probabilities(maximally_mixed(2), set);
  CHECK(nll(tau_mixed, rec_mixed, set) < 1e-12);
}

TEST_CASE("nll evaluates the hand-computed single-qubit sum") {
  const ProjectorSet set = build_projectors(1);
  // rho(tau) = I/2 against the record of |0><0|: two basis terms of
  // (0.5-1)^2/1 and (0.5-0)^2/1, the four unbiased terms vanish.
  const TauVector tau = tau_from_density(maximally_mixed(1), 0.0);
  CVector zero_amps(2);
  zero_amps << 1.0, 0.0;
  const MeasurementRecord rec =
      ideal_probabilities(to_density(PureState{1, zero_amps}), set);
  CHECK(nll(tau, rec, set) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("nll is nonnegative and rejects degenerate tau") {
  const ProjectorSet set = build_projectors(1);
  Rng rng(77);
  for (int i = 0; i < 20; ++i)
    CHECK(nll(random_tau(1, rng), random_record(set, rng), set) >= 0.0);

  TauVector zero{1, RVector::Zero(4)};
  const MeasurementRecord rec = random_record(set, rng);
  CHECK_THROWS_AS(nll(zero, rec, set), Error);
  CHECK_THROWS_AS(nll_gradient(zero, rec, set), Error);
}

TEST_CASE("nll is invariant under rescaling of tau") {
  const ProjectorSet set = build_projectors(2);
  Rng rng(31);
  const MeasurementRecord rec = random_record(set, rng);
  const TauVector tau = random_tau(2, rng);
  const double base = nll(tau, rec, set);
  for (const double c : {-2.0, 0.5, 3.0}) {
    TauVector scaled{2, c * tau.values};
    CHECK(std::abs(nll(scaled, rec, set) - base) < 1e-9);
  }
  const RVector grad = nll_gradient(tau, rec, set);
  CHECK(std::abs(grad.dot(tau.values)) < 1e-8);
}

TEST_CASE("nll gradient is stationary at the global minimum") {
  const ProjectorSet set = build_projectors(2);
  Rng rng(5);
  const DensityMatrix rho = generic_mixed(2, rng);
  const TauVector tau = tau_from_density(rho, 0.0);
  const MeasurementRecord rec = ideal_probabilities(rho, set);
  CHECK(nll_gradient(tau, rec, set).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("nll gradient matches central finite differences") {
  Rng rng(2024);
  for (const int d : {1, 2}) {
    const ProjectorSet set = build_projectors(d);
    for (int trial = 0; trial < 25; ++trial) {
      const TauVector tau = random_tau(d, rng);
      const MeasurementRecord rec = random_record(set, rng);
      const RVector analytic = nll_gradient(tau, rec, set);
      const RVector numeric =
          finite_difference_gradient(tau, rec, set, 1e-6);
      const double scale = numeric.cwiseAbs().maxCoeff();
      for (Eigen::Index k = 0; k < analytic.size(); ++k) {
        const double denom =
            std::max(std::abs(numeric(k)), 1e-3 * std::max(scale, 1.0));
        CHECK(std::abs(analytic(k) - numeric(k)) / denom < 1e-5);
      }
    }
  }
}

TEST_CASE("mle recovers states from noiseless records") {
  const ProjectorSet set = build_projectors(2);
  const MleConfig config;
  Rng state_rng(404);
  for (int i = 0; i < 5; ++i) {
    const DensityMatrix rho = haar_density(2, state_rng);
    const MeasurementRecord rec = ideal_probabilities(rho, set);
    Rng rng(split_seed(17, i));
    const MleResult result = reconstruct_mle(rec, set, config, rng);
    CHECK(fidelity(rho, result.rho) >= 0.999);
    CHECK((result.rho.matrix -
           density_from_tau(result.tau).matrix).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("mle fixes the maximally mixed state") {
  const ProjectorSet set = build_projectors(2);
  const MeasurementRecord rec =
      ideal_probabilities(maximally_mixed(2), set);
  Rng rng(7);
  const MleResult result = reconstruct_mle(rec, set, MleConfig{}, rng);
  CHECK(fidelity(maximally_mixed(2), result.rho) >= 0.999);
}

TEST_CASE("statistical noise degrades mle fidelity") {
  const ProjectorSet set = build_projectors(2);
  const MleConfig config;
  const int states = 10;
  double ideal_mean = 0.0, noisy_mean = 0.0;
  for (int i = 0; i < states; ++i) {
    Rng state_rng(split_seed(600, i));
    const DensityMatrix rho = haar_density(2, state_rng);
    const MeasurementRecord ideal = ideal_probabilities(rho, set);

    Rng r1(split_seed(601, i));
    ideal_mean += fidelity(rho, reconstruct_mle(ideal, set, config, r1).rho);

    Rng sample_rng(split_seed(602, i));
    const MeasurementRecord few = sample_record(ideal, 15, sample_rng);
    Rng r2(split_seed(603, i));
    noisy_mean += fidelity(rho, reconstruct_mle(few, set, config, r2).rho);
  }
  CHECK(noisy_mean / states < ideal_mean / states);
}

TEST_CASE("mle fidelity is monotone in shots up to one inversion") {
  const ProjectorSet set = build_projectors(2);
  const MleConfig config;
  const std::int64_t shot_levels[] = {15, 128, 1024, 8192};
  const int states = 20;
  std::vector<double> means;
  for (const std::int64_t shots : shot_levels) {
    double sum = 0.0;
    for (int i = 0; i < states; ++i) {
      Rng state_rng(split_seed(700, i));
      const DensityMatrix rho = haar_density(2, state_rng);
      Rng sample_rng(split_seed(701 + shots, i));
      const MeasurementRecord rec =
          sample_record(ideal_probabilities(rho, set), shots, sample_rng);
      Rng opt_rng(split_seed(702, i));
      sum += fidelity(rho, reconstruct_mle(rec, set, config, opt_rng).rho);
    }
    means.push_back(sum / states);
  }
  int inversions = 0;
  for (std::size_t i = 1; i < means.size(); ++i)
    if (means[i] < means[i - 1]) ++inversions;
  CHECK(inversions <= 1);
}

TEST_CASE("mle reports failure when every restart diverges") {
  const ProjectorSet set = build_projectors(1);
  Rng rng(3);
  const MeasurementRecord rec = random_record(set, rng);
  MleConfig config;
  config.init_scale = 1e200;  // overflows T^dag T, nll is never finite
  config.restarts = 2;
  Rng opt_rng(11);
  CHECK_THROWS_AS(reconstruct_mle(rec, set, config, opt_rng), Error);
}
