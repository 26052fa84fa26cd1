/* C interface to the bayescomp library. All functions return a bc_status
 * code (0 on success); the message for the last failure on the calling
 * thread is available from bc_last_error(). */
#ifndef BAYESCOMP_H
#define BAYESCOMP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BC_API __declspec(dllexport)
#else
#define BC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum bc_status {
  BC_OK = 0,
  BC_INVALID_PARAMETER = 1,
  BC_CONTRACT = 2,
  BC_FACTORIZATION = 3,
  BC_DEGENERATE_WEIGHTS = 4,
  BC_NON_CONVERGENCE = 5,
  BC_SEPARATION = 6,
  BC_INGESTION = 7,
  BC_START = 8,
  BC_PROPOSAL = 9,
  BC_OVERLAP = 10,
  BC_UNSTABLE_ESTIMATE = 11,
  BC_BAD_THETA_STAR = 12,
  BC_TOLERANCE_TOO_SMALL = 13,
  BC_CONFIG = 14,
  BC_IO = 15,
  BC_MODEL_FAILURE = 16,
  BC_INTERNAL = 99
};

typedef struct bc_rng bc_rng;
typedef struct bc_dataset bc_dataset;
typedef struct bc_result bc_result;

BC_API const char* bc_version(void);
BC_API const char* bc_last_error(void);
BC_API const char* bc_error_name(int code);

BC_API int bc_rng_create(uint64_t seed, uint64_t stream_id, bc_rng** out);
BC_API void bc_rng_destroy(bc_rng* rng);
BC_API int bc_rng_uniform(bc_rng* rng, double* out);
BC_API int bc_rng_normal(bc_rng* rng, double* out);

BC_API int bc_dataset_load_pima(const char* path, bc_dataset** out);
BC_API int bc_dataset_rows(const bc_dataset* data, size_t* out);
BC_API void bc_dataset_destroy(bc_dataset* data);

/* Fits the probit model on all dataset columns. beta and std_errors must
 * hold `capacity` doubles; `dim` receives the number of coefficients. */
BC_API int bc_probit_mle(const bc_dataset* data, double* beta, double* std_errors, size_t capacity, size_t* dim);

/* Comma-separated experiment names. */
BC_API const char* bc_experiment_list(void);

/* Runs an experiment. overrides_json may be NULL or an object with any of
 * seed, data_path, output_path, replicates, burn_in, thin. */
BC_API int bc_experiment_run(const char* experiment, const char* config_json, const char* overrides_json,
                             bc_result** out);
BC_API const char* bc_result_summary(const bc_result* result);
BC_API size_t bc_result_file_count(const bc_result* result);
BC_API const char* bc_result_file(const bc_result* result, size_t index);
BC_API void bc_result_destroy(bc_result* result);

#ifdef __cplusplus
}
#endif

#endif
