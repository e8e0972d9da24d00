#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "measurement.hpp"
#include "qstate.hpp"
#include "rng.hpp"

namespace qst {

struct NetworkConfig {
  int qubits = 2;
  int conv1_filters = 16;
  int conv2_filters = 32;
  int kernel_size = 3;
  int pool_size = 2;
  int dense1_units = 128;
  int dense2_units = 64;
  double dropout_rate = 0.25;
  double learning_rate = 0.01;
  int batch_size = 4;
  int epochs = 60;
  std::uint64_t seed = 0;

  // Per-qubit-count layer widths; everything else keeps the values above.
  static NetworkConfig defaults_for(int qubits);

  int input_length() const;   // 6^d
  int output_length() const;  // 4^d
  int pooled_length() const;
  int flatten_length() const;
  void validate() const;
};

struct LayerPlan {
  std::string name;
  int output_length = 0;
  int channels = 1;
  long parameter_count = 0;
};

// Layer sequence over the canonically ordered 6^d measurement vector,
// ending in the parameter-free tau -> rho head used for evaluation only.
std::vector<LayerPlan> architecture(const NetworkConfig& config);

// All trainable tensors; also the shape of gradients and Adagrad
// accumulators. Conv weights are (filters, in_channels * kernel) with taps
// contiguous per input channel.
struct TensorSet {
  Eigen::MatrixXd conv1_w, conv2_w, dense1_w, dense2_w, out_w;
  Eigen::VectorXd conv1_b, conv2_b, dense1_b, dense2_b, out_b;
};

struct TensorRef {
  const char* name;
  Eigen::MatrixXd* matrix = nullptr;  // exactly one of the two is set
  Eigen::VectorXd* vector = nullptr;
};

// Fixed serialization/update order of the tensors in a set.
std::vector<TensorRef> tensor_entries(TensorSet& tensors);

struct ModelParams {
  NetworkConfig config;
  TensorSet weights;
  TensorSet accumulators;  // Adagrad state, persists across steps
};

// Glorot-uniform weights, zero biases, zero accumulators; deterministic in
// config.seed.
ModelParams initialize_model(const NetworkConfig& config);

// Activations recorded by a forward pass, consumed by backpropagation.
struct ForwardTrace {
  RVector input;
  Eigen::MatrixXd conv1_cols, conv1_pre;
  Eigen::MatrixXd pool_out;
  Eigen::MatrixXi pool_argmax;
  Eigen::MatrixXd conv2_cols, conv2_pre;
  RVector flat;
  RVector dense1_pre, dense1_dropped, dense1_mask;
  RVector dense2_pre, dense2_dropped, dense2_mask;
  RVector output;
};

// Maps a 6^d measurement vector to a 4^d tau prediction. Inference mode
// (training_mode = false) is deterministic; training mode applies inverted
// dropout and needs a random source.
RVector forward(const ModelParams& model, const RVector& input,
                bool training_mode, Rng* rng, ForwardTrace* trace = nullptr);

// Mean over components of squared differences.
double loss_mse(const RVector& predicted_tau, const RVector& target_tau);

struct Sample {
  RVector measurements;  // length 6^d
  RVector target_tau;    // length 4^d, canonical
};

// How a dataset's inputs were produced. Targets always come from the
// noiseless pre-channel state.
struct Provenance {
  enum class Kind { ideal, shots, depol_shots };
  Kind kind = Kind::ideal;
  std::int64_t shots = 0;
  double depol_p = 0.0;

  std::string to_string() const;
  // Grammar: "ideal" | "shots:K" | "depol:P+shots:K".
  static Provenance parse(const std::string& text);
};

struct Dataset {
  int qubits = 0;
  Provenance provenance;
  std::vector<Sample> samples;
};

// Gradients of the mean batch MSE with respect to every weight. Dropout is
// active (masks drawn from rng) exactly as during a training step;
// loss_out, when set, receives the batch loss under those masks.
TensorSet backward(const ModelParams& model, std::span<const Sample> batch,
                   Rng& rng, double* loss_out = nullptr);

// G += g^2; w -= lr * g / (sqrt(G) + 1e-8), elementwise, in place.
void adagrad_step(ModelParams& model, const TensorSet& gradients,
                  double learning_rate);

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_fidelity = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  ModelParams model;
  std::vector<EpochStats> history;
};

// Seeded minibatch training with per-epoch validation fidelity through the
// tau -> rho head. Identical seeds produce bitwise-identical models.
TrainResult train(
    const Dataset& training, const Dataset& validation,
    const NetworkConfig& config,
    const std::function<void(const EpochStats&)>& on_epoch = nullptr);

// Inference followed by density_from_tau; the result is a valid density
// matrix for any weights.
DensityMatrix predict_density(const ModelParams& model,
                              const MeasurementRecord& record);

// Haar state -> (optional depolarize) -> ideal probabilities -> (optional
// shot sampling); per-sample seeds split from master_seed.
Dataset generate_dataset(int count, int qubits, const Provenance& provenance,
                         std::uint64_t master_seed);

}  // namespace qst
