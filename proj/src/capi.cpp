#include "qst/qst.h"

#include <cstring>
#include <string>

#include "dataio.hpp"
#include "measurement.hpp"
#include "mle.hpp"
#include "nn.hpp"
#include "qstate.hpp"

// Opaque handle definitions. Each wraps one immutable core value.
struct qst_density {
  qst::DensityMatrix value;
};
struct qst_projectors {
  qst::ProjectorSet value;
};
struct qst_record {
  qst::MeasurementRecord value;
};
struct qst_dataset {
  qst::Dataset value;
};
struct qst_model {
  qst::ModelParams params;
  std::vector<qst::EpochStats> history;
};
struct qst_results {
  qst::ResultsTable value;
};
struct qst_mle_result {
  qst::MleResult value;
};

namespace {

thread_local std::string g_last_error;

qst_status status_of(qst::Error::Code code) {
  switch (code) {
    case qst::Error::Code::invalid_argument:
      return QST_ERROR_INVALID_ARGUMENT;
    case qst::Error::Code::dimension_mismatch:
      return QST_ERROR_DIMENSION_MISMATCH;
    case qst::Error::Code::numeric:
      return QST_ERROR_NUMERIC;
    case qst::Error::Code::io:
      return QST_ERROR_IO;
    case qst::Error::Code::format:
      return QST_ERROR_FORMAT;
    case qst::Error::Code::optimization:
      return QST_ERROR_OPTIMIZATION;
  }
  return QST_ERROR_INTERNAL;
}

qst_status set_error(qst_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs the body, translating exceptions into status codes.
template <typename Fn>
qst_status guarded(Fn&& fn) {
  try {
    fn();
    return QST_OK;
  } catch (const qst::Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::exception& e) {
    return set_error(QST_ERROR_INTERNAL, e.what());
  } catch (...) {
    return set_error(QST_ERROR_INTERNAL, "unknown error");
  }
}

qst_status require(bool condition, const char* message) {
  if (condition) return QST_OK;
  return set_error(QST_ERROR_INVALID_ARGUMENT, message);
}

qst::NetworkConfig to_core(const qst_network_config& c) {
  qst::NetworkConfig config;
  config.qubits = c.qubits;
  config.conv1_filters = c.conv1_filters;
  config.conv2_filters = c.conv2_filters;
  config.kernel_size = c.kernel_size;
  config.pool_size = c.pool_size;
  config.dense1_units = c.dense1_units;
  config.dense2_units = c.dense2_units;
  config.dropout_rate = c.dropout_rate;
  config.learning_rate = c.learning_rate;
  config.batch_size = c.batch_size;
  config.epochs = c.epochs;
  config.seed = c.seed;
  return config;
}

std::int64_t provenance_shots(const qst::Provenance& p) {
  return p.kind == qst::Provenance::Kind::ideal ? qst::kIdealShots : p.shots;
}

}  // namespace

extern "C" {

const char* qst_last_error(void) { return g_last_error.c_str(); }

const char* qst_version(void) { return "1.0.0"; }

/* ---- density matrices ------------------------------------------------- */

qst_status qst_density_haar(int qubits, uint64_t seed, qst_density** out) {
  if (auto s = require(out != nullptr, "out must not be null")) return s;
  return guarded([&] {
    qst::Rng rng(seed);
    *out = new qst_density{
        qst::to_density(qst::haar_random_pure(qubits, rng))};
  });
}

qst_status qst_density_from_tau(const double* tau, size_t length,
                                qst_density** out) {
  if (auto s = require(out && tau, "tau and out must not be null")) return s;
  return guarded([&] {
    const int qubits =
        qst::qubits_from_tau_size(static_cast<Eigen::Index>(length));
    qst::TauVector vec{qubits, Eigen::Map<const qst::RVector>(
                                   tau, static_cast<Eigen::Index>(length))};
    *out = new qst_density{qst::density_from_tau(vec)};
  });
}

qst_status qst_density_depolarize(const qst_density* rho, double p,
                                  qst_density** out) {
  if (auto s = require(rho && out, "rho and out must not be null")) return s;
  return guarded(
      [&] { *out = new qst_density{qst::depolarize(rho->value, p)}; });
}

void qst_density_free(qst_density* rho) { delete rho; }

int qst_density_qubits(const qst_density* rho) {
  return rho ? rho->value.qubits : 0;
}

qst_status qst_density_elements(const qst_density* rho, double* re,
                                double* im, size_t length) {
  if (auto s = require(rho && re && im, "arguments must not be null"))
    return s;
  return guarded([&] {
    const qst::CMatrix& m = rho->value.matrix;
    const size_t need = static_cast<size_t>(m.rows()) * m.cols();
    if (length < need)
      qst::fail(qst::Error::Code::invalid_argument,
                "buffer holds " + std::to_string(length) +
                    " entries, need " + std::to_string(need));
    size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c, ++k) {
        re[k] = m(r, c).real();
        im[k] = m(r, c).imag();
      }
  });
}

qst_status qst_density_tau(const qst_density* rho, double epsilon,
                           double* tau, size_t length) {
  if (auto s = require(rho && tau, "rho and tau must not be null")) return s;
  return guarded([&] {
    const qst::TauVector vec = qst::tau_from_density(
        rho->value,
        epsilon < 0.0 ? qst::kDefaultCholeskyEpsilon : epsilon);
    if (static_cast<Eigen::Index>(length) != vec.values.size())
      qst::fail(qst::Error::Code::invalid_argument,
                "tau buffer length " + std::to_string(length) +
                    " does not match 4^d = " +
                    std::to_string(vec.values.size()));
    Eigen::Map<qst::RVector>(tau, vec.values.size()) = vec.values;
  });
}

qst_status qst_fidelity(const qst_density* rho, const qst_density* sigma,
                        double* out) {
  if (auto s = require(rho && sigma && out, "arguments must not be null"))
    return s;
  return guarded([&] { *out = qst::fidelity(rho->value, sigma->value); });
}

qst_status qst_purity(const qst_density* rho, double* out) {
  if (auto s = require(rho && out, "arguments must not be null")) return s;
  return guarded([&] { *out = qst::purity(rho->value); });
}

/* ---- tomography measurements ------------------------------------------ */

qst_status qst_projectors_build(int qubits, qst_projectors** out) {
  if (auto s = require(out != nullptr, "out must not be null")) return s;
  return guarded(
      [&] { *out = new qst_projectors{qst::build_projectors(qubits)}; });
}

void qst_projectors_free(qst_projectors* projectors) { delete projectors; }

int qst_projectors_count(const qst_projectors* projectors) {
  return projectors ? projectors->value.count() : 0;
}

qst_status qst_record_ideal(const qst_density* rho,
                            const qst_projectors* projectors,
                            qst_record** out) {
  if (auto s = require(rho && projectors && out,
                       "arguments must not be null"))
    return s;
  return guarded([&] {
    *out = new qst_record{
        qst::ideal_probabilities(rho->value, projectors->value)};
  });
}

qst_status qst_record_sample(const qst_record* ideal, int64_t shots,
                             uint64_t seed, qst_record** out) {
  if (auto s = require(ideal && out, "arguments must not be null")) return s;
  return guarded([&] {
    qst::Rng rng(seed);
    *out = new qst_record{qst::sample_record(ideal->value, shots, rng)};
  });
}

qst_status qst_record_from_values(int qubits, int64_t shots,
                                  const double* values, size_t length,
                                  qst_record** out) {
  if (auto s = require(values && out, "arguments must not be null")) return s;
  return guarded([&] {
    size_t expected = 1;
    for (int i = 0; i < qubits; ++i) expected *= 6;
    if (qubits < 1 || length != expected)
      qst::fail(qst::Error::Code::dimension_mismatch,
                "value count " + std::to_string(length) +
                    " does not match 6^d");
    if (shots < 0)
      qst::fail(qst::Error::Code::invalid_argument,
                "shots must be nonnegative (0 = ideal)");
    for (size_t i = 0; i < length; ++i)
      if (!(values[i] >= 0.0 && values[i] <= 1.0))
        qst::fail(qst::Error::Code::invalid_argument,
                  "record values must lie in [0, 1]");
    qst::MeasurementRecord record;
    record.qubits = qubits;
    record.shots = shots;
    record.values = Eigen::Map<const qst::RVector>(
        values, static_cast<Eigen::Index>(length));
    *out = new qst_record{std::move(record)};
  });
}

void qst_record_free(qst_record* record) { delete record; }

int qst_record_qubits(const qst_record* record) {
  return record ? record->value.qubits : 0;
}

int64_t qst_record_shots(const qst_record* record) {
  return record ? record->value.shots : 0;
}

qst_status qst_record_values(const qst_record* record, double* values,
                             size_t length) {
  if (auto s = require(record && values, "arguments must not be null"))
    return s;
  return guarded([&] {
    if (static_cast<Eigen::Index>(length) != record->value.values.size())
      qst::fail(qst::Error::Code::invalid_argument,
                "buffer length does not match the record");
    Eigen::Map<qst::RVector>(values, record->value.values.size()) =
        record->value.values;
  });
}

qst_status qst_record_squared_difference(const qst_record* a,
                                         const qst_record* b, double* out) {
  if (auto s = require(a && b && out, "arguments must not be null")) return s;
  return guarded(
      [&] { *out = qst::squared_difference(a->value, b->value); });
}

double qst_default_depolarizing_p(int qubits) {
  return qst::default_depolarizing_p(qubits);
}

/* ---- maximum likelihood estimation ------------------------------------ */

void qst_mle_config_init(qst_mle_config* config) {
  if (!config) return;
  const qst::MleConfig defaults;
  config->grad_tolerance = defaults.grad_tolerance;
  config->max_iterations = defaults.max_iterations;
  config->denom_floor = defaults.denom_floor;
  config->init_scale = defaults.init_scale;
  config->restarts = defaults.restarts;
}

qst_status qst_mle_reconstruct(const qst_record* record,
                               const qst_projectors* projectors,
                               const qst_mle_config* config, uint64_t seed,
                               qst_mle_result** out) {
  if (auto s = require(record && projectors && out,
                       "arguments must not be null"))
    return s;
  return guarded([&] {
    qst::MleConfig core;
    if (config) {
      core.grad_tolerance = config->grad_tolerance;
      core.max_iterations = config->max_iterations;
      core.denom_floor = config->denom_floor;
      core.init_scale = config->init_scale;
      core.restarts = config->restarts;
    }
    qst::Rng rng(seed);
    *out = new qst_mle_result{
        qst::reconstruct_mle(record->value, projectors->value, core, rng)};
  });
}

void qst_mle_result_free(qst_mle_result* result) { delete result; }

qst_status qst_mle_result_density(const qst_mle_result* result,
                                  qst_density** out) {
  if (auto s = require(result && out, "arguments must not be null")) return s;
  return guarded([&] { *out = new qst_density{result->value.rho}; });
}

double qst_mle_result_nll(const qst_mle_result* result) {
  return result ? result->value.nll : 0.0;
}

int qst_mle_result_iterations(const qst_mle_result* result) {
  return result ? result->value.iterations : 0;
}

int qst_mle_result_converged(const qst_mle_result* result) {
  return result && result->value.converged ? 1 : 0;
}

double qst_mle_result_seconds(const qst_mle_result* result) {
  return result ? result->value.wall_time_seconds : 0.0;
}

/* ---- neural network reconstruction ------------------------------------ */

qst_status qst_network_config_defaults(int qubits,
                                       qst_network_config* config) {
  if (auto s = require(config != nullptr, "config must not be null"))
    return s;
  return guarded([&] {
    const qst::NetworkConfig d = qst::NetworkConfig::defaults_for(qubits);
    config->qubits = d.qubits;
    config->conv1_filters = d.conv1_filters;
    config->conv2_filters = d.conv2_filters;
    config->kernel_size = d.kernel_size;
    config->pool_size = d.pool_size;
    config->dense1_units = d.dense1_units;
    config->dense2_units = d.dense2_units;
    config->dropout_rate = d.dropout_rate;
    config->learning_rate = d.learning_rate;
    config->batch_size = d.batch_size;
    config->epochs = d.epochs;
    config->seed = d.seed;
  });
}

qst_status qst_train(const qst_dataset* training,
                     const qst_dataset* validation,
                     const qst_network_config* config,
                     qst_epoch_callback on_epoch, void* user_data,
                     qst_model** out) {
  if (auto s = require(training && validation && config && out,
                       "arguments must not be null"))
    return s;
  return guarded([&] {
    std::function<void(const qst::EpochStats&)> callback;
    if (on_epoch)
      callback = [on_epoch, user_data](const qst::EpochStats& stats) {
        on_epoch(stats.epoch, stats.train_loss, stats.val_fidelity,
                 stats.seconds, user_data);
      };
    qst::TrainResult result = qst::train(training->value, validation->value,
                                         to_core(*config), callback);
    *out = new qst_model{std::move(result.model), std::move(result.history)};
  });
}

void qst_model_free(qst_model* model) { delete model; }

int qst_model_qubits(const qst_model* model) {
  return model ? model->params.config.qubits : 0;
}

qst_status qst_model_predict(const qst_model* model, const qst_record* record,
                             qst_density** out) {
  if (auto s = require(model && record && out, "arguments must not be null"))
    return s;
  return guarded([&] {
    *out = new qst_density{qst::predict_density(model->params,
                                                record->value)};
  });
}

qst_status qst_model_save(const qst_model* model, const char* path) {
  if (auto s = require(model && path, "arguments must not be null")) return s;
  return guarded(
      [&] { qst::save_model(model->params, model->history, path); });
}

qst_status qst_model_load(const char* path, qst_model** out) {
  if (auto s = require(path && out, "arguments must not be null")) return s;
  return guarded([&] {
    qst::LoadedModel loaded = qst::load_model(path);
    *out = new qst_model{std::move(loaded.model), std::move(loaded.history)};
  });
}

/* ---- datasets ---------------------------------------------------------- */

qst_status qst_dataset_generate(int qubits, int count, const char* provenance,
                                uint64_t seed, qst_dataset** out) {
  if (auto s = require(provenance && out, "arguments must not be null"))
    return s;
  return guarded([&] {
    *out = new qst_dataset{qst::generate_dataset(
        count, qubits, qst::Provenance::parse(provenance), seed)};
  });
}

void qst_dataset_free(qst_dataset* dataset) { delete dataset; }

int qst_dataset_count(const qst_dataset* dataset) {
  return dataset ? static_cast<int>(dataset->value.samples.size()) : 0;
}

int qst_dataset_qubits(const qst_dataset* dataset) {
  return dataset ? dataset->value.qubits : 0;
}

qst_status qst_dataset_provenance(const qst_dataset* dataset, char* buffer,
                                  size_t buffer_size) {
  if (auto s = require(dataset && buffer, "arguments must not be null"))
    return s;
  return guarded([&] {
    const std::string text = dataset->value.provenance.to_string();
    if (buffer_size <= text.size())
      qst::fail(qst::Error::Code::invalid_argument,
                "buffer too small for provenance string");
    std::memcpy(buffer, text.c_str(), text.size() + 1);
  });
}

qst_status qst_dataset_save(const qst_dataset* dataset, const char* path) {
  if (auto s = require(dataset && path, "arguments must not be null"))
    return s;
  return guarded([&] { qst::save_dataset(dataset->value, path); });
}

qst_status qst_dataset_load(const char* path, qst_dataset** out) {
  if (auto s = require(path && out, "arguments must not be null")) return s;
  return guarded([&] { *out = new qst_dataset{qst::load_dataset(path)}; });
}

qst_status qst_dataset_record(const qst_dataset* dataset, int index,
                              qst_record** out) {
  if (auto s = require(dataset && out, "arguments must not be null"))
    return s;
  return guarded([&] {
    const auto& samples = dataset->value.samples;
    if (index < 0 || static_cast<size_t>(index) >= samples.size())
      qst::fail(qst::Error::Code::invalid_argument,
                "sample index " + std::to_string(index) +
                    " out of range for " + std::to_string(samples.size()) +
                    " samples");
    qst::MeasurementRecord record;
    record.qubits = dataset->value.qubits;
    record.shots = provenance_shots(dataset->value.provenance);
    record.values = samples[static_cast<size_t>(index)].measurements;
    *out = new qst_record{std::move(record)};
  });
}

qst_status qst_dataset_target(const qst_dataset* dataset, int index,
                              qst_density** out) {
  if (auto s = require(dataset && out, "arguments must not be null"))
    return s;
  return guarded([&] {
    const auto& samples = dataset->value.samples;
    if (index < 0 || static_cast<size_t>(index) >= samples.size())
      qst::fail(qst::Error::Code::invalid_argument,
                "sample index " + std::to_string(index) +
                    " out of range for " + std::to_string(samples.size()) +
                    " samples");
    const qst::TauVector tau{dataset->value.qubits,
                             samples[static_cast<size_t>(index)].target_tau};
    *out = new qst_density{qst::density_from_tau(tau)};
  });
}

/* ---- results tables ----------------------------------------------------*/

qst_status qst_results_create(const char* experiment_id, qst_results** out) {
  if (auto s = require(out != nullptr, "out must not be null")) return s;
  return guarded([&] {
    auto* results = new qst_results{};
    results->value.experiment_id = experiment_id ? experiment_id : "";
    *out = results;
  });
}

void qst_results_free(qst_results* results) { delete results; }

qst_status qst_results_add(qst_results* results, const char* method,
                           int qubits, int64_t shots, double noise_p,
                           int state_index, double fidelity,
                           double wall_time_s, uint64_t seed) {
  if (auto s = require(results && method, "arguments must not be null"))
    return s;
  return guarded([&] {
    results->value.add(method, qubits, shots, noise_p, state_index, fidelity,
                       wall_time_s, seed);
  });
}

qst_status qst_results_write_csv(const qst_results* results,
                                 const char* path) {
  if (auto s = require(results && path, "arguments must not be null"))
    return s;
  return guarded([&] { qst::write_results(results->value, path); });
}

}  // extern "C"
