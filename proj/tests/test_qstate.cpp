#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "qstate.hpp"

using namespace qst;

namespace {

DensityMatrix basis_density(int qubits, int index) {
  const int dim = 1 << qubits;
  CVector amps = CVector::Zero(dim);
  amps(index) = 1.0;
  return to_density(PureState{qubits, amps});
}

DensityMatrix maximally_mixed(int qubits) {
  const int dim = 1 << qubits;
  return DensityMatrix{qubits, CMatrix::Identity(dim, dim) / double(dim)};
}

DensityMatrix haar_density(int qubits, Rng& rng) {
  return to_density(haar_random_pure(qubits, rng));
}

// Unitary from the QR factorization of a Gaussian matrix.
CMatrix random_unitary(int dim, Rng& rng) {
  CMatrix g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = Complex(rng.normal(), rng.normal());
  return Eigen::HouseholderQR<CMatrix>(g).householderQ();
}

}  // namespace

TEST_CASE("haar_random_pure returns unit-norm deterministic states") {
  Rng rng(7);
  const PureState psi = haar_random_pure(1, rng);
  CHECK(psi.amplitudes.size() == 2);
  CHECK(std::abs(psi.amplitudes.norm() - 1.0) < 1e-12);

  Rng a(123), b(123);
  const PureState s1 = haar_random_pure(3, a);
  const PureState s2 = haar_random_pure(3, b);
  CHECK(s1.amplitudes == s2.amplitudes);

  CHECK_THROWS_AS(haar_random_pure(0, rng), Error);
  CHECK_THROWS_AS(haar_random_pure(-2, rng), Error);
}

TEST_CASE("haar_random_pure matches the analytic overlap statistics") {
  // E |<e|psi>|^2 = 1/2^d under the Haar measure.
  const int samples = 10000;

  Rng rng1(42);
  double mean1 = 0.0;
  for (int i = 0; i < samples; ++i)
    mean1 += std::norm(haar_random_pure(1, rng1).amplitudes(0));
  mean1 /= samples;
  // |<0|psi>|^2 is Beta(1,1): sigma of the mean is 1/sqrt(12 N).
  CHECK(std::abs(mean1 - 0.5) < 3.0 / std::sqrt(12.0 * samples));

  Rng rng2(43);
  double mean2 = 0.0;
  for (int i = 0; i < samples; ++i)
    mean2 += std::norm(haar_random_pure(2, rng2).amplitudes(0));
  mean2 /= samples;
  CHECK(std::abs(mean2 - 0.25) < 0.01);
}

TEST_CASE("to_density forms the expected outer products") {
  const DensityMatrix zero = basis_density(1, 0);
  CHECK(std::abs(zero.matrix(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(zero.matrix(0, 1)) < 1e-15);
  CHECK(std::abs(zero.matrix(1, 0)) < 1e-15);
  CHECK(std::abs(zero.matrix(1, 1)) < 1e-15);

  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const DensityMatrix d = to_density(PureState{1, plus});
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      CHECK(std::abs(d.matrix(r, c) - 0.5) < 1e-12);

  Rng rng(5);
  for (int i = 0; i < 5; ++i)
    CHECK(purity(haar_density(2, rng)) == doctest::Approx(1.0).epsilon(1e-10));

  CVector unnormalized(2);
  unnormalized << 1.0, 1.0;
  CHECK_THROWS_AS(to_density(PureState{1, unnormalized}), Error);
}

TEST_CASE("tau_from_density: closed forms") {
  SUBCASE("maximally mixed, no regularization") {
    const TauVector tau = tau_from_density(maximally_mixed(1), 0.0);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(tau.values(0) == doctest::Approx(s).epsilon(1e-12));
    CHECK(tau.values(1) == doctest::Approx(s).epsilon(1e-12));
    CHECK(std::abs(tau.values(2)) < 1e-15);
    CHECK(std::abs(tau.values(3)) < 1e-15);
  }
  SUBCASE("pure |0><0| with the default regularization") {
    const double eps = 1e-7;
    const TauVector tau = tau_from_density(basis_density(1, 0), eps);
    CHECK(tau.values(0) == doctest::Approx(std::sqrt(1.0 - eps / 2)).epsilon(1e-12));
    CHECK(tau.values(1) == doctest::Approx(std::sqrt(eps / 2)).epsilon(1e-9));
    CHECK(std::abs(tau.values(2)) < 1e-15);
    CHECK(std::abs(tau.values(3)) < 1e-15);
  }
  SUBCASE("epsilon domain") {
    CHECK_THROWS_AS(tau_from_density(maximally_mixed(1), -1e-9), Error);
    CHECK_THROWS_AS(tau_from_density(maximally_mixed(1), 2e-3), Error);
  }
  SUBCASE("indefinite input fails the decomposition") {
    CMatrix bad(2, 2);
    bad << 1.1, 0.0, 0.0, -0.1;
    CHECK_THROWS_AS(tau_from_density(DensityMatrix{1, bad}, 1e-7), Error);
  }
}

TEST_CASE("tau round trip keeps fidelity within 1e-6 of unity") {
  Rng rng(99);
  for (int d = 1; d <= 3; ++d) {
    for (int i = 0; i < 25; ++i) {
      const DensityMatrix rho = haar_density(d, rng);
      const TauVector tau = tau_from_density(rho, 1e-7);
      CHECK(std::abs(tau.values.squaredNorm() - 1.0) < 1e-10);
      for (int k = 0; k < (1 << d); ++k) CHECK(tau.values(k) >= 0.0);
      const DensityMatrix back = density_from_tau(tau);
      CHECK(fidelity(rho, back) >= 1.0 - 1e-6);
    }
  }
}

TEST_CASE("density_from_tau: scale freedom and totality") {
  RVector v(4);
  v << 1, 0, 0, 0;
  const DensityMatrix a = density_from_tau(TauVector{1, v});
  CHECK(std::abs(a.matrix(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(a.matrix(1, 1)) < 1e-15);

  v << 2, 0, 0, 0;
  const DensityMatrix b = density_from_tau(TauVector{1, v});
  CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() < 1e-15);

  RVector zero = RVector::Zero(16);
  CHECK_THROWS_AS(density_from_tau(TauVector{2, zero}), Error);

  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const int d = 1 + int(rng.below(2));
    RVector t(1 << (2 * d));
    for (Eigen::Index k = 0; k < t.size(); ++k) t(k) = rng.uniform_in(-1, 1);
    const DensityMatrix rho = density_from_tau(TauVector{d, t});
    CHECK_NOTHROW(check_density(rho, 1e-10, 1e-10, -1e-12));
  }
}

TEST_CASE("fidelity agrees with the closed-form cases") {
  Rng rng(11);
  const DensityMatrix rho = haar_density(2, rng);
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fidelity(basis_density(1, 0), basis_density(1, 1)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fidelity(basis_density(1, 0), maximally_mixed(1)) ==
        doctest::Approx(0.5).epsilon(1e-10));

  CHECK_THROWS_AS(fidelity(basis_density(1, 0), maximally_mixed(2)), Error);
}

TEST_CASE("fidelity is symmetric, unitarily invariant and pure-reducible") {
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    // Mixtures of Haar projectors give generic full-rank states.
    const DensityMatrix r1 = haar_density(2, rng);
    const DensityMatrix r2 = haar_density(2, rng);
    const DensityMatrix s1 = haar_density(2, rng);
    const DensityMatrix rho{2, 0.6 * r1.matrix + 0.4 * r2.matrix};
    const DensityMatrix sigma{2, 0.7 * s1.matrix + 0.3 * r2.matrix};

    CHECK(std::abs(fidelity(rho, sigma) - fidelity(sigma, rho)) < 1e-8);

    const CMatrix u = random_unitary(4, rng);
    const DensityMatrix rho_u{2, u * rho.matrix * u.adjoint()};
    const DensityMatrix sigma_u{2, u * sigma.matrix * u.adjoint()};
    CHECK(std::abs(fidelity(rho_u, sigma_u) - fidelity(rho, sigma)) < 1e-8);

    const PureState psi = haar_random_pure(2, rng);
    const double expectation =
        (psi.amplitudes.adjoint() * sigma.matrix * psi.amplitudes)(0).real();
    CHECK(std::abs(fidelity(to_density(psi), sigma) - expectation) < 1e-8);
  }
}

TEST_CASE("operations are pure: concurrent use reproduces serial results") {
  // Each worker owns its own seeded source; results must match a serial run.
  auto job = [](std::uint64_t seed) {
    Rng rng(seed);
    double acc = 0.0;
    for (int i = 0; i < 30; ++i) {
      const DensityMatrix rho = haar_density(2, rng);
      acc += fidelity(rho, density_from_tau(tau_from_density(rho)));
    }
    return acc;
  };
  double serial[4];
  for (int t = 0; t < 4; ++t) serial[t] = job(split_seed(640, t));

  double parallel[4];
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t)
    workers.emplace_back(
        [&, t] { parallel[t] = job(split_seed(640, t)); });
  for (std::thread& w : workers) w.join();
  for (int t = 0; t < 4; ++t) CHECK(serial[t] == parallel[t]);
}

TEST_CASE("purity spans the expected range") {
  CHECK(purity(maximally_mixed(2)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(purity(maximally_mixed(1)) == doctest::Approx(0.5).epsilon(1e-12));
  Rng rng(3);
  CHECK(purity(haar_density(3, rng)) == doctest::Approx(1.0).epsilon(1e-10));
}
