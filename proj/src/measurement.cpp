#include "measurement.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace qst {

namespace {

// Single-qubit eigenstates in canonical (basis, outcome) order.
std::array<Eigen::Vector2cd, 6> single_qubit_kets() {
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  std::array<Eigen::Vector2cd, 6> kets;
  kets[0] << 1.0, 0.0;      // H
  kets[1] << 0.0, 1.0;      // V
  kets[2] << s, s;          // D
  kets[3] << s, -s;         // A
  kets[4] << s, i * s;      // R
  kets[5] << s, -i * s;     // L
  return kets;
}

void require_same_layout(const MeasurementRecord& a,
                         const MeasurementRecord& b) {
  if (a.qubits != b.qubits || a.values.size() != b.values.size())
    fail(Error::Code::dimension_mismatch,
         "measurement records have different dimensions");
}

}  // namespace

ProjectorSet build_projectors(int qubits) {
  const int dim = dimension(qubits);
  const auto kets = single_qubit_kets();

  int settings = 1;
  for (int i = 0; i < qubits; ++i) settings *= 3;

  ProjectorSet set;
  set.qubits = qubits;
  set.projectors.reserve(static_cast<std::size_t>(settings) * dim);
  for (int setting = 0; setting < settings; ++setting) {
    // Base-3 digits of the setting, qubit 0 most significant.
    std::array<int, kMaxQubits> basis{};
    int rest = setting;
    for (int q = qubits - 1; q >= 0; --q) {
      basis[q] = rest % 3;
      rest /= 3;
    }
    for (int outcome = 0; outcome < dim; ++outcome) {
      CVector ket = CVector::Ones(1);
      for (int q = 0; q < qubits; ++q) {
        const int bit = (outcome >> (qubits - 1 - q)) & 1;
        const Eigen::Vector2cd& factor = kets[basis[q] * 2 + bit];
        CVector next(ket.size() * 2);
        for (Eigen::Index j = 0; j < ket.size(); ++j) {
          next(2 * j) = ket(j) * factor(0);
          next(2 * j + 1) = ket(j) * factor(1);
        }
        ket = std::move(next);
      }
      set.projectors.push_back(ket * ket.adjoint());
    }
  }
  return set;
}

double real_trace_product(const CMatrix& a, const CMatrix& b) {
  // Tr(ab) = sum_ij a_ij b_ji = sum_ij a_ij conj(b_ij) for Hermitian b.
  return a.cwiseProduct(b.conjugate()).sum().real();
}

MeasurementRecord ideal_probabilities(const DensityMatrix& rho,
                                      const ProjectorSet& projectors) {
  if (rho.qubits != projectors.qubits ||
      rho.matrix.rows() != projectors.dimension())
    fail(Error::Code::dimension_mismatch,
         "density matrix and projector set have different dimensions");
  MeasurementRecord record;
  record.qubits = rho.qubits;
  record.shots = kIdealShots;
  record.values.resize(projectors.count());
  for (int i = 0; i < projectors.count(); ++i) {
    const double p = real_trace_product(rho.matrix, projectors.projectors[i]);
    record.values(i) = std::clamp(p, 0.0, 1.0);
  }
  return record;
}

MeasurementRecord sample_record(const MeasurementRecord& ideal,
                                std::int64_t shots, Rng& rng) {
  if (!ideal.ideal())
    fail(Error::Code::invalid_argument,
         "sample_record expects an ideal-probability record");
  if (shots < 1)
    fail(Error::Code::invalid_argument, "shot count must be at least 1");

  const int outcomes = 1 << ideal.qubits;
  const int settings = static_cast<int>(ideal.values.size()) / outcomes;

  MeasurementRecord sampled;
  sampled.qubits = ideal.qubits;
  sampled.shots = shots;
  sampled.values.resize(ideal.values.size());

  std::vector<double> cumulative(outcomes);
  std::vector<std::int64_t> counts(outcomes);
  for (int s = 0; s < settings; ++s) {
    double acc = 0.0;
    for (int o = 0; o < outcomes; ++o) {
      acc += ideal.values(s * outcomes + o);
      cumulative[o] = std::min(acc, 1.0);
    }
    cumulative[outcomes - 1] = 1.0;  // absorb roundoff in the last bin
    std::fill(counts.begin(), counts.end(), 0);
    for (std::int64_t k = 0; k < shots; ++k) {
      const double u = rng.uniform();
      const int o = static_cast<int>(
          std::upper_bound(cumulative.begin(), cumulative.end(), u) -
          cumulative.begin());
      ++counts[std::min(o, outcomes - 1)];
    }
    for (int o = 0; o < outcomes; ++o)
      sampled.values(s * outcomes + o) =
          static_cast<double>(counts[o]) / static_cast<double>(shots);
  }
  return sampled;
}

DensityMatrix depolarize(const DensityMatrix& rho, double p) {
  if (!(p >= 0.0 && p <= 1.0))
    fail(Error::Code::invalid_argument,
         "depolarizing weight must lie in [0, 1]");
  const int dim = dimension(rho.qubits);
  if (rho.matrix.rows() != dim)
    fail(Error::Code::dimension_mismatch,
         "density matrix shape does not match its qubit count");
  return DensityMatrix{rho.qubits, (1.0 - p) * rho.matrix +
                                       (p / dim) *
                                           CMatrix::Identity(dim, dim)};
}

double squared_difference(const MeasurementRecord& a,
                          const MeasurementRecord& b) {
  require_same_layout(a, b);
  return (a.values - b.values).squaredNorm();
}

double default_depolarizing_p(int qubits) {
  return qubits <= 2 ? 0.05 : 0.1;
}

}  // namespace qst
