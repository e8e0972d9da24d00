#pragma once

#include <cstdint>
#include <vector>

#include "qstate.hpp"
#include "rng.hpp"

namespace qst {

// Overcomplete tomography projectors for d qubits: all 6^d tensor products
// of the single-qubit eigenstates, grouped into 3^d settings of 2^d
// mutually exclusive outcomes.
//
// Canonical order: per qubit the bases are (Z, X, Y) with eigenstate pairs
// (H,V), (D,A), (R,L), where |H>=|0>, |V>=|1>, |D>=(|0>+|1>)/sqrt2,
// |A>=(|0>-|1>)/sqrt2, |R>=(|0>+i|1>)/sqrt2, |L>=(|0>-i|1>)/sqrt2.
// A setting is a base-3 word over qubits and an outcome a base-2 word, both
// with qubit 0 most significant; the flat index is setting-major.
struct ProjectorSet {
  int qubits = 0;
  std::vector<CMatrix> projectors;

  int dimension() const { return 1 << qubits; }
  int setting_count() const {
    int n = 1;
    for (int i = 0; i < qubits; ++i) n *= 3;
    return n;
  }
  int outcome_count() const { return 1 << qubits; }
  int count() const { return static_cast<int>(projectors.size()); }
};

// Shots value marking exact Born-rule probabilities.
inline constexpr std::int64_t kIdealShots = 0;

// One state's 6^d tomography values in canonical order: probabilities when
// shots == kIdealShots, otherwise per-setting frequencies counts/shots.
struct MeasurementRecord {
  int qubits = 0;
  std::int64_t shots = kIdealShots;
  RVector values;

  bool ideal() const { return shots == kIdealShots; }
};

ProjectorSet build_projectors(int qubits);

// values[i] = Re Tr(rho P_i), clamped into [0, 1] against roundoff.
MeasurementRecord ideal_probabilities(const DensityMatrix& rho,
                                      const ProjectorSet& projectors);

// Draws one multinomial sample of size `shots` per measurement setting and
// stores counts/shots. Settings are sampled independently, matching one
// circuit execution batch per basis choice.
MeasurementRecord sample_record(const MeasurementRecord& ideal,
                                std::int64_t shots, Rng& rng);

// (1-p) rho + p I/2^d.
DensityMatrix depolarize(const DensityMatrix& rho, double p);

// Sum over all 6^d entries of (a_i - b_i)^2.
double squared_difference(const MeasurementRecord& a,
                          const MeasurementRecord& b);

// Default mixing weight of the depolarizing stand-in channel.
double default_depolarizing_p(int qubits);

// Re Tr(a b) without forming the product; both arguments Hermitian.
double real_trace_product(const CMatrix& a, const CMatrix& b);

}  // namespace qst
