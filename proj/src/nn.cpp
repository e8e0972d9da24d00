#include "nn.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>

namespace qst {

namespace {

int pow_int(int base, int exp) {
  int v = 1;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

NetworkConfig NetworkConfig::defaults_for(int qubits) {
  dimension(qubits);  // validates the range
  NetworkConfig config;
  config.qubits = qubits;
  switch (qubits) {
    case 1:
      config.conv1_filters = 8;
      config.conv2_filters = 16;
      config.dense1_units = 64;
      config.dense2_units = 32;
      break;
    case 2:
      config.conv1_filters = 16;
      config.conv2_filters = 32;
      config.dense1_units = 128;
      config.dense2_units = 64;
      break;
    case 3:
      config.conv1_filters = 16;
      config.conv2_filters = 32;
      config.dense1_units = 256;
      config.dense2_units = 128;
      break;
    default:
      config.conv1_filters = 32;
      config.conv2_filters = 64;
      config.dense1_units = 512;
      config.dense2_units = 256;
      break;
  }
  return config;
}

int NetworkConfig::input_length() const { return pow_int(6, qubits); }

int NetworkConfig::output_length() const { return pow_int(4, qubits); }

int NetworkConfig::pooled_length() const {
  return (input_length() - pool_size) / pool_size + 1;
}

int NetworkConfig::flatten_length() const {
  return pooled_length() * conv2_filters;
}

void NetworkConfig::validate() const {
  dimension(qubits);
  if (conv1_filters < 1 || conv2_filters < 1 || dense1_units < 1 ||
      dense2_units < 1)
    fail(Error::Code::invalid_argument, "all layer sizes must be at least 1");
  if (kernel_size < 1 || pool_size < 1)
    fail(Error::Code::invalid_argument,
         "kernel and pool sizes must be at least 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    fail(Error::Code::invalid_argument, "dropout rate must lie in [0, 1)");
  if (!(learning_rate > 0.0))
    fail(Error::Code::invalid_argument, "learning rate must be positive");
  if (batch_size < 1)
    fail(Error::Code::invalid_argument, "batch size must be at least 1");
  if (epochs < 0)
    fail(Error::Code::invalid_argument, "epoch count must be nonnegative");
  if (input_length() < pool_size)
    fail(Error::Code::invalid_argument,
         "pool size exceeds the input length");
  if (pooled_length() < kernel_size)
    fail(Error::Code::invalid_argument,
         "pooled length " + std::to_string(pooled_length()) +
             " is shorter than the kernel size");
}

std::vector<LayerPlan> architecture(const NetworkConfig& config) {
  config.validate();
  const int len = config.input_length();
  const int plen = config.pooled_length();
  const int flat = config.flatten_length();
  const int out = config.output_length();
  const long k = config.kernel_size;
  std::vector<LayerPlan> plan;
  plan.push_back({"input", len, 1, 0});
  plan.push_back({"conv1_relu", len, config.conv1_filters,
                  config.conv1_filters * (k + 1)});
  plan.push_back({"max_pool", plen, config.conv1_filters, 0});
  plan.push_back({"conv2_relu", plen, config.conv2_filters,
                  config.conv2_filters * (config.conv1_filters * k + 1)});
  plan.push_back({"flatten", flat, 1, 0});
  plan.push_back({"dense1_relu", config.dense1_units, 1,
                  long(config.dense1_units) * (flat + 1)});
  plan.push_back({"dropout", config.dense1_units, 1, 0});
  plan.push_back({"dense2_relu", config.dense2_units, 1,
                  long(config.dense2_units) * (config.dense1_units + 1)});
  plan.push_back({"dropout", config.dense2_units, 1, 0});
  plan.push_back({"dense_out", out, 1, long(out) * (config.dense2_units + 1)});
  plan.push_back({"density_head", out, 1, 0});  // tau -> rho, no parameters
  return plan;
}

std::vector<TensorRef> tensor_entries(TensorSet& tensors) {
  return {
      {"conv1_w", &tensors.conv1_w, nullptr},
      {"conv1_b", nullptr, &tensors.conv1_b},
      {"conv2_w", &tensors.conv2_w, nullptr},
      {"conv2_b", nullptr, &tensors.conv2_b},
      {"dense1_w", &tensors.dense1_w, nullptr},
      {"dense1_b", nullptr, &tensors.dense1_b},
      {"dense2_w", &tensors.dense2_w, nullptr},
      {"dense2_b", nullptr, &tensors.dense2_b},
      {"out_w", &tensors.out_w, nullptr},
      {"out_b", nullptr, &tensors.out_b},
  };
}

namespace {

TensorSet zero_tensors(const NetworkConfig& config) {
  const int k = config.kernel_size;
  TensorSet t;
  t.conv1_w = Eigen::MatrixXd::Zero(config.conv1_filters, k);
  t.conv1_b = Eigen::VectorXd::Zero(config.conv1_filters);
  t.conv2_w =
      Eigen::MatrixXd::Zero(config.conv2_filters, config.conv1_filters * k);
  t.conv2_b = Eigen::VectorXd::Zero(config.conv2_filters);
  t.dense1_w =
      Eigen::MatrixXd::Zero(config.dense1_units, config.flatten_length());
  t.dense1_b = Eigen::VectorXd::Zero(config.dense1_units);
  t.dense2_w =
      Eigen::MatrixXd::Zero(config.dense2_units, config.dense1_units);
  t.dense2_b = Eigen::VectorXd::Zero(config.dense2_units);
  t.out_w =
      Eigen::MatrixXd::Zero(config.output_length(), config.dense2_units);
  t.out_b = Eigen::VectorXd::Zero(config.output_length());
  return t;
}

void glorot_fill(Eigen::MatrixXd& w, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      w(r, c) = rng.uniform_in(-limit, limit);
}

// cols(t, ic*k + j) = in(t + j - pad_left, ic), zero outside the signal.
Eigen::MatrixXd im2col(const Eigen::MatrixXd& in, int kernel) {
  const int len = static_cast<int>(in.rows());
  const int channels = static_cast<int>(in.cols());
  const int pad_left = (kernel - 1) / 2;
  Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(len, channels * kernel);
  for (int t = 0; t < len; ++t)
    for (int ic = 0; ic < channels; ++ic)
      for (int j = 0; j < kernel; ++j) {
        const int s = t + j - pad_left;
        if (s >= 0 && s < len) cols(t, ic * kernel + j) = in(s, ic);
      }
  return cols;
}

// Adjoint of im2col: scatter-adds column gradients back onto the signal.
Eigen::MatrixXd col2im(const Eigen::MatrixXd& cols, int len, int channels,
                       int kernel) {
  const int pad_left = (kernel - 1) / 2;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(len, channels);
  for (int t = 0; t < len; ++t)
    for (int ic = 0; ic < channels; ++ic)
      for (int j = 0; j < kernel; ++j) {
        const int s = t + j - pad_left;
        if (s >= 0 && s < len) out(s, ic) += cols(t, ic * kernel + j);
      }
  return out;
}

RVector relu_backward(const RVector& grad, const RVector& pre) {
  return grad.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
}

Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& grad,
                              const Eigen::MatrixXd& pre) {
  return grad.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
}

RVector dropout_mask(Eigen::Index size, double rate, bool training, Rng* rng) {
  if (!training || rate == 0.0) return RVector::Ones(size);
  if (!rng)
    fail(Error::Code::invalid_argument,
         "training-mode forward with dropout needs a random source");
  const double keep_scale = 1.0 / (1.0 - rate);
  RVector mask(size);
  for (Eigen::Index i = 0; i < size; ++i)
    mask(i) = rng->uniform() >= rate ? keep_scale : 0.0;
  return mask;
}

}  // namespace

ModelParams initialize_model(const NetworkConfig& config) {
  config.validate();
  ModelParams model;
  model.config = config;
  model.weights = zero_tensors(config);
  model.accumulators = zero_tensors(config);

  const int k = config.kernel_size;
  Rng rng(split_seed(config.seed, 0));
  glorot_fill(model.weights.conv1_w, k, config.conv1_filters * k, rng);
  glorot_fill(model.weights.conv2_w, config.conv1_filters * k,
              config.conv2_filters * k, rng);
  glorot_fill(model.weights.dense1_w, config.flatten_length(),
              config.dense1_units, rng);
  glorot_fill(model.weights.dense2_w, config.dense1_units,
              config.dense2_units, rng);
  glorot_fill(model.weights.out_w, config.dense2_units,
              config.output_length(), rng);
  return model;
}

RVector forward(const ModelParams& model, const RVector& input,
                bool training_mode, Rng* rng, ForwardTrace* trace) {
  const NetworkConfig& config = model.config;
  if (input.size() != config.input_length())
    fail(Error::Code::dimension_mismatch,
         "input length " + std::to_string(input.size()) +
             " does not match the network input " +
             std::to_string(config.input_length()));

  ForwardTrace local;
  ForwardTrace& t = trace ? *trace : local;
  const TensorSet& w = model.weights;
  const int kernel = config.kernel_size;

  t.input = input;

  // conv1 + relu
  t.conv1_cols = im2col(input, kernel);
  t.conv1_pre = t.conv1_cols * w.conv1_w.transpose();
  t.conv1_pre.rowwise() += w.conv1_b.transpose();
  Eigen::MatrixXd act1 = t.conv1_pre.cwiseMax(0.0);

  // max pool
  const int plen = config.pooled_length();
  const int pool = config.pool_size;
  t.pool_out.resize(plen, act1.cols());
  t.pool_argmax.resize(plen, act1.cols());
  for (int p = 0; p < plen; ++p)
    for (Eigen::Index c = 0; c < act1.cols(); ++c) {
      int best_row = p * pool;
      double best = act1(best_row, c);
      for (int j = 1; j < pool; ++j) {
        const int row = p * pool + j;
        if (act1(row, c) > best) {
          best = act1(row, c);
          best_row = row;
        }
      }
      t.pool_out(p, c) = best;
      t.pool_argmax(p, c) = best_row;
    }

  // conv2 + relu
  t.conv2_cols = im2col(t.pool_out, kernel);
  t.conv2_pre = t.conv2_cols * w.conv2_w.transpose();
  t.conv2_pre.rowwise() += w.conv2_b.transpose();
  Eigen::MatrixXd act2 = t.conv2_pre.cwiseMax(0.0);

  // flatten, position-major
  t.flat.resize(config.flatten_length());
  for (int p = 0; p < plen; ++p)
    for (Eigen::Index c = 0; c < act2.cols(); ++c)
      t.flat(p * act2.cols() + c) = act2(p, c);

  // dense1 + relu + dropout
  t.dense1_pre = w.dense1_w * t.flat + w.dense1_b;
  t.dense1_mask = dropout_mask(config.dense1_units, config.dropout_rate,
                               training_mode, rng);
  t.dense1_dropped =
      t.dense1_pre.cwiseMax(0.0).cwiseProduct(t.dense1_mask);

  // dense2 + relu + dropout
  t.dense2_pre = w.dense2_w * t.dense1_dropped + w.dense2_b;
  t.dense2_mask = dropout_mask(config.dense2_units, config.dropout_rate,
                               training_mode, rng);
  t.dense2_dropped =
      t.dense2_pre.cwiseMax(0.0).cwiseProduct(t.dense2_mask);

  // linear output (tau is signed)
  t.output = w.out_w * t.dense2_dropped + w.out_b;
  return t.output;
}

double loss_mse(const RVector& predicted_tau, const RVector& target_tau) {
  if (predicted_tau.size() != target_tau.size())
    fail(Error::Code::dimension_mismatch,
         "prediction and target have different lengths");
  return (predicted_tau - target_tau).squaredNorm() /
         static_cast<double>(predicted_tau.size());
}

TensorSet backward(const ModelParams& model, std::span<const Sample> batch,
                   Rng& rng, double* loss_out) {
  if (batch.empty())
    fail(Error::Code::invalid_argument, "backward needs a non-empty batch");
  const NetworkConfig& config = model.config;
  const TensorSet& w = model.weights;
  TensorSet grads = zero_tensors(config);
  const int kernel = config.kernel_size;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  double loss_sum = 0.0;
  ForwardTrace t;
  for (const Sample& sample : batch) {
    forward(model, sample.measurements, true, &rng, &t);
    loss_sum += loss_mse(t.output, sample.target_tau);

    // d(mean squared error)/d(output)
    RVector g = 2.0 * (t.output - sample.target_tau) /
                static_cast<double>(t.output.size());

    grads.out_w.noalias() += g * t.dense2_dropped.transpose();
    grads.out_b += g;
    g = w.out_w.transpose() * g;

    g = g.cwiseProduct(t.dense2_mask);
    g = relu_backward(g, t.dense2_pre);
    grads.dense2_w.noalias() += g * t.dense1_dropped.transpose();
    grads.dense2_b += g;
    g = w.dense2_w.transpose() * g;

    g = g.cwiseProduct(t.dense1_mask);
    g = relu_backward(g, t.dense1_pre);
    grads.dense1_w.noalias() += g * t.flat.transpose();
    grads.dense1_b += g;
    RVector g_flat = w.dense1_w.transpose() * g;

    const int plen = config.pooled_length();
    const int c2 = config.conv2_filters;
    Eigen::MatrixXd g_act2(plen, c2);
    for (int p = 0; p < plen; ++p)
      for (int c = 0; c < c2; ++c) g_act2(p, c) = g_flat(p * c2 + c);

    Eigen::MatrixXd g_pre2 = relu_backward(g_act2, t.conv2_pre);
    grads.conv2_w.noalias() += g_pre2.transpose() * t.conv2_cols;
    grads.conv2_b += g_pre2.colwise().sum().transpose();
    Eigen::MatrixXd g_pool =
        col2im(g_pre2 * w.conv2_w, plen, config.conv1_filters, kernel);

    const int len = config.input_length();
    Eigen::MatrixXd g_act1 = Eigen::MatrixXd::Zero(len, config.conv1_filters);
    for (int p = 0; p < plen; ++p)
      for (int c = 0; c < config.conv1_filters; ++c)
        g_act1(t.pool_argmax(p, c), c) += g_pool(p, c);

    Eigen::MatrixXd g_pre1 = relu_backward(g_act1, t.conv1_pre);
    grads.conv1_w.noalias() += g_pre1.transpose() * t.conv1_cols;
    grads.conv1_b += g_pre1.colwise().sum().transpose();
  }

  for (TensorRef ref : tensor_entries(grads)) {
    if (ref.matrix) *ref.matrix *= inv_batch;
    if (ref.vector) *ref.vector *= inv_batch;
  }
  if (loss_out) *loss_out = loss_sum * inv_batch;
  return grads;
}

void adagrad_step(ModelParams& model, const TensorSet& gradients,
                  double learning_rate) {
  TensorSet& weights = model.weights;
  TensorSet& accum = model.accumulators;
  auto ws = tensor_entries(weights);
  auto as = tensor_entries(accum);
  auto gs = tensor_entries(const_cast<TensorSet&>(gradients));
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (ws[i].matrix) {
      const Eigen::MatrixXd& g = *gs[i].matrix;
      if (g.rows() != ws[i].matrix->rows() ||
          g.cols() != ws[i].matrix->cols())
        fail(Error::Code::dimension_mismatch,
             std::string("gradient shape mismatch for ") + ws[i].name);
      as[i].matrix->array() += g.array().square();
      ws[i].matrix->array() -= learning_rate * g.array() /
                               (as[i].matrix->array().sqrt() + 1e-8);
    } else {
      const Eigen::VectorXd& g = *gs[i].vector;
      if (g.size() != ws[i].vector->size())
        fail(Error::Code::dimension_mismatch,
             std::string("gradient shape mismatch for ") + ws[i].name);
      as[i].vector->array() += g.array().square();
      ws[i].vector->array() -= learning_rate * g.array() /
                               (as[i].vector->array().sqrt() + 1e-8);
    }
  }
}

TrainResult train(const Dataset& training, const Dataset& validation,
                  const NetworkConfig& config,
                  const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  if (training.samples.empty())
    fail(Error::Code::invalid_argument, "training dataset is empty");
  if (validation.samples.empty())
    fail(Error::Code::invalid_argument, "validation dataset is empty");
  if (training.qubits != config.qubits || validation.qubits != config.qubits)
    fail(Error::Code::dimension_mismatch,
         "dataset qubit counts do not match the network configuration");

  TrainResult result;
  result.model = initialize_model(config);

  // Validation targets are fixed; build their densities once.
  std::vector<DensityMatrix> val_targets;
  val_targets.reserve(validation.samples.size());
  for (const Sample& sample : validation.samples)
    val_targets.push_back(
        density_from_tau(TauVector{config.qubits, sample.target_tau}));

  Rng rng(split_seed(config.seed, 1));
  std::vector<std::size_t> order(training.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Sample> batch;
  batch.reserve(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();

    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    int batch_count = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      batch.clear();
      const std::size_t stop =
          std::min(order.size(), start + config.batch_size);
      for (std::size_t i = start; i < stop; ++i)
        batch.push_back(training.samples[order[i]]);
      double batch_loss = 0.0;
      TensorSet grads = backward(result.model, batch, rng, &batch_loss);
      if (!std::isfinite(batch_loss))
        fail(Error::Code::numeric,
             "non-finite training loss at epoch " + std::to_string(epoch) +
                 ", batch " + std::to_string(batch_count));
      adagrad_step(result.model, grads, config.learning_rate);
      loss_sum += batch_loss;
      ++batch_count;
    }

    double fidelity_sum = 0.0;
    for (std::size_t i = 0; i < validation.samples.size(); ++i) {
      const RVector predicted = forward(
          result.model, validation.samples[i].measurements, false, nullptr);
      fidelity_sum += fidelity(
          density_from_tau(TauVector{config.qubits, predicted}),
          val_targets[i]);
    }

    const auto t1 = std::chrono::steady_clock::now();
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / std::max(1, batch_count);
    stats.val_fidelity =
        fidelity_sum / static_cast<double>(validation.samples.size());
    stats.seconds = std::chrono::duration<double>(t1 - t0).count();
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

DensityMatrix predict_density(const ModelParams& model,
                              const MeasurementRecord& record) {
  if (record.qubits != model.config.qubits)
    fail(Error::Code::dimension_mismatch,
         "record qubit count " + std::to_string(record.qubits) +
             " does not match the model (" +
             std::to_string(model.config.qubits) + ")");
  const RVector predicted = forward(model, record.values, false, nullptr);
  return density_from_tau(TauVector{model.config.qubits, predicted});
}

std::string Provenance::to_string() const {
  switch (kind) {
    case Kind::ideal:
      return "ideal";
    case Kind::shots:
      return "shots:" + std::to_string(shots);
    case Kind::depol_shots:
      return "depol:" + format_double(depol_p) +
             "+shots:" + std::to_string(shots);
  }
  fail(Error::Code::invalid_argument, "unknown provenance kind");
}

Provenance Provenance::parse(const std::string& text) {
  const auto bad = [&]() -> Provenance {
    fail(Error::Code::format,
         "invalid provenance '" + text +
             "': expected ideal | shots:K | depol:P+shots:K");
  };
  Provenance p;
  if (text == "ideal") return p;
  auto parse_shots = [&](std::string_view s) {
    std::int64_t shots = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), shots);
    if (ec != std::errc() || ptr != s.data() + s.size() || shots < 1) bad();
    return shots;
  };
  if (text.starts_with("shots:")) {
    p.kind = Kind::shots;
    p.shots = parse_shots(std::string_view(text).substr(6));
    return p;
  }
  if (text.starts_with("depol:")) {
    const auto plus = text.find("+shots:");
    if (plus == std::string::npos) return bad();
    const std::string_view weight(text.data() + 6, plus - 6);
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(weight.data(), weight.data() + weight.size(), value);
    if (ec != std::errc() || ptr != weight.data() + weight.size() ||
        !(value >= 0.0 && value <= 1.0))
      return bad();
    p.kind = Kind::depol_shots;
    p.depol_p = value;
    p.shots = parse_shots(std::string_view(text).substr(plus + 7));
    return p;
  }
  return bad();
}

Dataset generate_dataset(int count, int qubits, const Provenance& provenance,
                         std::uint64_t master_seed) {
  if (count < 1)
    fail(Error::Code::invalid_argument, "sample count must be at least 1");
  const ProjectorSet projectors = build_projectors(qubits);

  Dataset dataset;
  dataset.qubits = qubits;
  dataset.provenance = provenance;
  dataset.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(split_seed(master_seed, static_cast<std::uint64_t>(i)));
    const DensityMatrix target = to_density(haar_random_pure(qubits, rng));
    const TauVector target_tau = tau_from_density(target);

    DensityMatrix measured = target;
    if (provenance.kind == Provenance::Kind::depol_shots)
      measured = depolarize(target, provenance.depol_p);
    MeasurementRecord record = ideal_probabilities(measured, projectors);
    if (provenance.kind != Provenance::Kind::ideal)
      record = sample_record(record, provenance.shots, rng);

    dataset.samples.push_back(Sample{record.values, target_tau.values});
  }
  return dataset;
}

}  // namespace qst
