#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn.hpp"

namespace qst {

// Dataset files are JSON lines: a header object
//   {"version":1,"d":2,"provenance":"shots:15","count":N}
// followed by one {"m":[...],"tau":[...]} object per sample. Numbers carry
// 17 significant digits, enough to round-trip doubles exactly.
inline constexpr int kDatasetFormatVersion = 1;
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

// Model checkpoints are a single JSON object: format version, the network
// configuration, every weight and accumulator tensor as an explicit shape
// plus base64-encoded little-endian float64 payload, and the training
// history. Loading reproduces bitwise-identical inference.
inline constexpr int kCheckpointFormatVersion = 1;
struct LoadedModel {
  ModelParams model;
  std::vector<EpochStats> history;
};
void save_model(const ModelParams& model,
                const std::vector<EpochStats>& history,
                const std::string& path);
LoadedModel load_model(const std::string& path);

struct ResultRow {
  std::string method;
  int qubits = 0;
  std::int64_t shots = 0;  // 0 = ideal record
  double noise_p = 0.0;
  int state_index = 0;
  double fidelity = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
};

struct ResultsTable {
  std::string experiment_id;
  std::vector<ResultRow> rows;

  void add(std::string method, int qubits, std::int64_t shots, double noise_p,
           int state_index, double fidelity, double wall_time_s,
           std::uint64_t seed) {
    rows.push_back(ResultRow{std::move(method), qubits, shots, noise_p,
                             state_index, fidelity, wall_time_s, seed});
  }
};

// CSV with header method,d,shots,noise_p,state_index,fidelity,wall_time_s,seed
// sorted by (method, d, shots, noise_p, state_index, seed). Rejects
// fidelities outside [0, 1] and duplicate (method, d, shots, noise_p,
// state_index) keys.
void write_results(const ResultsTable& table, const std::string& path);

}  // namespace qst
