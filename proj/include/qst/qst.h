/* qst - quantum state tomography benchmark toolkit, C API.
 *
 * Every function returns a qst_status; QST_OK means success and any other
 * value describes the failure class, with a human-readable message available
 * from qst_last_error() (thread-local). Objects are opaque handles created
 * through qst_*_ functions and released with the matching *_free call.
 * All randomness is controlled by explicit seeds; equal seeds reproduce
 * results bit for bit.
 */
#ifndef QST_H
#define QST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QST_API __declspec(dllexport)
#else
#define QST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qst_status {
  QST_OK = 0,
  QST_ERROR_INVALID_ARGUMENT = 1,
  QST_ERROR_DIMENSION_MISMATCH = 2,
  QST_ERROR_NUMERIC = 3,
  QST_ERROR_IO = 4,
  QST_ERROR_FORMAT = 5,
  QST_ERROR_OPTIMIZATION = 6,
  QST_ERROR_INTERNAL = 7
} qst_status;

/* Message for the most recent failure on the calling thread. */
QST_API const char* qst_last_error(void);

QST_API const char* qst_version(void);

typedef struct qst_density qst_density;
typedef struct qst_projectors qst_projectors;
typedef struct qst_record qst_record;
typedef struct qst_dataset qst_dataset;
typedef struct qst_model qst_model;
typedef struct qst_results qst_results;
typedef struct qst_mle_result qst_mle_result;

/* ---- density matrices ------------------------------------------------- */

/* Haar-random pure state of `qubits` qubits as a density matrix. */
QST_API qst_status qst_density_haar(int qubits, uint64_t seed,
                                    qst_density** out);
/* Density matrix from a tau vector of length 4^d. */
QST_API qst_status qst_density_from_tau(const double* tau, size_t length,
                                        qst_density** out);
QST_API qst_status qst_density_depolarize(const qst_density* rho, double p,
                                          qst_density** out);
QST_API void qst_density_free(qst_density* rho);

QST_API int qst_density_qubits(const qst_density* rho);
/* Copies the 2^d x 2^d matrix, row-major, into re/im (each dim*dim long). */
QST_API qst_status qst_density_elements(const qst_density* rho, double* re,
                                        double* im, size_t length);
/* Canonical tau vector (Cholesky regularization `epsilon`, pass a negative
 * value for the default) into tau (length 4^d). */
QST_API qst_status qst_density_tau(const qst_density* rho, double epsilon,
                                   double* tau, size_t length);
QST_API qst_status qst_fidelity(const qst_density* rho,
                                const qst_density* sigma, double* out);
QST_API qst_status qst_purity(const qst_density* rho, double* out);

/* ---- tomography measurements ------------------------------------------ */

QST_API qst_status qst_projectors_build(int qubits, qst_projectors** out);
QST_API void qst_projectors_free(qst_projectors* projectors);
QST_API int qst_projectors_count(const qst_projectors* projectors);

/* Exact Born-rule record (shots() == 0). */
QST_API qst_status qst_record_ideal(const qst_density* rho,
                                    const qst_projectors* projectors,
                                    qst_record** out);
/* Finite-shot record: one multinomial sample per measurement setting. */
QST_API qst_status qst_record_sample(const qst_record* ideal, int64_t shots,
                                     uint64_t seed, qst_record** out);
QST_API qst_status qst_record_from_values(int qubits, int64_t shots,
                                          const double* values, size_t length,
                                          qst_record** out);
QST_API void qst_record_free(qst_record* record);

QST_API int qst_record_qubits(const qst_record* record);
/* 0 means ideal probabilities. */
QST_API int64_t qst_record_shots(const qst_record* record);
QST_API qst_status qst_record_values(const qst_record* record, double* values,
                                     size_t length);
/* Sum over all 6^d entries of the squared differences. */
QST_API qst_status qst_record_squared_difference(const qst_record* a,
                                                 const qst_record* b,
                                                 double* out);

/* Default depolarizing weight of the noisy-scenario stand-in channel. */
QST_API double qst_default_depolarizing_p(int qubits);

/* ---- maximum likelihood estimation ------------------------------------ */

typedef struct qst_mle_config {
  double grad_tolerance;  /* default 1e-8 */
  int max_iterations;     /* default 500 */
  double denom_floor;     /* default 1e-9 */
  double init_scale;      /* <= 0 selects sqrt(6 / (2 * 4^d)) */
  int restarts;           /* default 3 */
} qst_mle_config;

QST_API void qst_mle_config_init(qst_mle_config* config);

QST_API qst_status qst_mle_reconstruct(const qst_record* record,
                                       const qst_projectors* projectors,
                                       const qst_mle_config* config,
                                       uint64_t seed, qst_mle_result** out);
QST_API void qst_mle_result_free(qst_mle_result* result);
QST_API qst_status qst_mle_result_density(const qst_mle_result* result,
                                          qst_density** out);
QST_API double qst_mle_result_nll(const qst_mle_result* result);
QST_API int qst_mle_result_iterations(const qst_mle_result* result);
QST_API int qst_mle_result_converged(const qst_mle_result* result);
QST_API double qst_mle_result_seconds(const qst_mle_result* result);

/* ---- neural network reconstruction ------------------------------------ */

typedef struct qst_network_config {
  int qubits;
  int conv1_filters;
  int conv2_filters;
  int kernel_size;
  int pool_size;
  int dense1_units;
  int dense2_units;
  double dropout_rate;
  double learning_rate;
  int batch_size;
  int epochs;
  uint64_t seed;
} qst_network_config;

/* Fills the per-qubit-count default configuration. */
QST_API qst_status qst_network_config_defaults(int qubits,
                                               qst_network_config* config);

typedef void (*qst_epoch_callback)(int epoch, double train_loss,
                                   double val_fidelity, double seconds,
                                   void* user_data);

QST_API qst_status qst_train(const qst_dataset* training,
                             const qst_dataset* validation,
                             const qst_network_config* config,
                             qst_epoch_callback on_epoch, void* user_data,
                             qst_model** out);
QST_API void qst_model_free(qst_model* model);
QST_API int qst_model_qubits(const qst_model* model);
QST_API qst_status qst_model_predict(const qst_model* model,
                                     const qst_record* record,
                                     qst_density** out);
QST_API qst_status qst_model_save(const qst_model* model, const char* path);
QST_API qst_status qst_model_load(const char* path, qst_model** out);

/* ---- datasets ---------------------------------------------------------- */

/* provenance grammar: "ideal" | "shots:K" | "depol:P+shots:K" */
QST_API qst_status qst_dataset_generate(int qubits, int count,
                                        const char* provenance, uint64_t seed,
                                        qst_dataset** out);
QST_API void qst_dataset_free(qst_dataset* dataset);
QST_API int qst_dataset_count(const qst_dataset* dataset);
QST_API int qst_dataset_qubits(const qst_dataset* dataset);
QST_API qst_status qst_dataset_provenance(const qst_dataset* dataset,
                                          char* buffer, size_t buffer_size);
QST_API qst_status qst_dataset_save(const qst_dataset* dataset,
                                    const char* path);
QST_API qst_status qst_dataset_load(const char* path, qst_dataset** out);
/* Sample `index` measurement vector as a record (shots from provenance). */
QST_API qst_status qst_dataset_record(const qst_dataset* dataset, int index,
                                      qst_record** out);
/* Density matrix of sample `index` stored target tau. */
QST_API qst_status qst_dataset_target(const qst_dataset* dataset, int index,
                                      qst_density** out);

/* ---- results tables ----------------------------------------------------*/

QST_API qst_status qst_results_create(const char* experiment_id,
                                      qst_results** out);
QST_API void qst_results_free(qst_results* results);
QST_API qst_status qst_results_add(qst_results* results, const char* method,
                                   int qubits, int64_t shots, double noise_p,
                                   int state_index, double fidelity,
                                   double wall_time_s, uint64_t seed);
/* CSV: method,d,shots,noise_p,state_index,fidelity,wall_time_s,seed with a
 * deterministic sort order; byte-identical for identical contents. */
QST_API qst_status qst_results_write_csv(const qst_results* results,
                                         const char* path);

#ifdef __cplusplus
}
#endif

#endif /* QST_H */
