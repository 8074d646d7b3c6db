// Copyright 2026 The infolab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the infolab library. Objects are opaque handles owned by
 * the caller; every fallible call returns an il_status and leaves a message
 * for il_last_error() on the calling thread. Strings returned through char**
 * are released with il_string_free. Cell indices, class labels and
 * coordinates are 1-based, as in the JSON formats. Information values are in
 * bits. */

#ifndef INFOLAB_INFOLAB_H_
#define INFOLAB_INFOLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(INFOLAB_BUILDING)
#define IL_API __attribute__((visibility("default")))
#else
#define IL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum il_status {
  IL_OK = 0,
  IL_INVALID_ARGUMENT = 1,
  IL_NON_MONOTONE_BOUNDARIES = 2,
  IL_PROBABILITY_NOT_NORMALIZED = 3,
  IL_NEGATIVE_PROBABILITY = 4,
  IL_INDEX_OUT_OF_RANGE = 5,
  IL_DIMENSION_MISMATCH = 6,
  IL_OUTSIDE_SUPPORT = 7,
  IL_INVALID_COUNT = 8,
  IL_POSITION_CONFLICT = 9,
  IL_NOT_ORTHONORMAL = 10,
  IL_HETEROGENEOUS_GRIDS = 11,
  IL_NOT_EXACTLY_COMPUTABLE = 12,
  IL_SUPPORT_VIOLATION = 13,
  IL_NOT_A_COARSENING = 14,
  IL_SHAPE_MISMATCH = 15,
  IL_TOO_LARGE = 16,
  IL_SELF_CHECK_FAILED = 17,
  IL_PARSE = 18,
  IL_IO = 19,
  IL_INTERNAL = 99
} il_status;

typedef struct il_model il_model;
typedef struct il_encoder il_encoder;

typedef struct il_decomposition {
  double total;
  double conditional_entropy;
  double encoder_effect;
  double decoder_effect;
  int support_violation;
} il_decomposition;

typedef struct il_study_check {
  double mi[3];
  double cond_entropy[3];
  double class_entropy;
  double selector_mil;
} il_study_check;

IL_API const char* il_version(void);
IL_API const char* il_status_name(il_status status);
IL_API const char* il_last_error(void);
IL_API void il_string_free(char* s);

/* "bits" or "nats"; affects il_to_units and il_units_suffix only. */
IL_API il_status il_set_units(const char* units);
IL_API double il_to_units(double bits);
IL_API const char* il_units_suffix(void);

/* Models. name_or_path is a built-in name or a JSON file path. */
IL_API il_status il_model_load(const char* name_or_path, il_model** out);
IL_API il_status il_model_parse(const char* json, il_model** out);
IL_API il_status il_model_builtin_names(char** out); /* newline separated */
IL_API void il_model_free(il_model* model);
IL_API il_status il_model_to_json(const il_model* model, char** out);
IL_API il_status il_model_dim(const il_model* model, size_t* out);
IL_API il_status il_model_classes(const il_model* model, size_t* out);
IL_API il_status il_model_pdf(const il_model* model, const double* x, size_t dim, size_t y,
                              double* out);
IL_API il_status il_model_posterior(const il_model* model, const double* x, size_t dim,
                                    double* out, size_t classes);
IL_API il_status il_model_sample_csv(const il_model* model, uint64_t seed, size_t n, char** out);
IL_API il_status il_model_mask(const il_model* model, const size_t* coords, size_t count,
                               il_model** out);
/* u is row-major dim x dim. */
IL_API il_status il_model_rotate(const il_model* model, const double* u, size_t dim,
                                 il_model** out);
IL_API il_status il_model_symmetrize(const il_model* model, il_model** out);
/* Inserts uniform [0,1) noise coordinates at the given positions of the
 * widened vector. */
IL_API il_status il_model_sparsify(const il_model* model, const size_t* positions, size_t count,
                                   il_model** out);

/* Encoders: inline JSON or a path. Defaults are resolved against model. */
IL_API il_status il_encoder_parse(const char* json_or_path, const il_model* model,
                                  il_encoder** out);
IL_API void il_encoder_free(il_encoder* enc);
IL_API il_status il_encoder_describe(const il_encoder* enc, char** out);
/* Layer prefixes of a chain (a single encoder is its own only prefix). The
 * count is always reported; at most capacity handles are written. */
IL_API il_status il_encoder_prefixes(const il_encoder* enc, il_encoder** out, size_t capacity,
                                     size_t* count);

/* Exact measures. */
IL_API il_status il_class_entropy(const il_model* model, double* out);
IL_API il_status il_conditional_entropy(const il_model* model, double* out);
IL_API il_status il_mutual_information(const il_model* model, double* out);
IL_API il_status il_encoder_mi(const il_model* model, const il_encoder* enc, double* out);
IL_API il_status il_mil(const il_model* model, const il_encoder* enc, double* out);
IL_API il_status il_ip_error(const il_model* model, const il_encoder* enc, double* out);
/* Decoder (1 - alpha) * optimal + alpha * uniform, alpha in [0,1]. */
IL_API il_status il_decompose(const il_model* model, const il_encoder* enc, double alpha,
                              il_decomposition* out);
IL_API il_status il_layer_losses(const il_model* model, const il_encoder* const* chain,
                                 size_t count, double* out);

/* Monte-Carlo risk and gap of the Bayes posterior mixed with the uniform
 * pmf by weight alpha. */
IL_API il_status il_mc_risk(const il_model* model, double alpha, size_t n, uint64_t seed,
                            double* value, double* std_error);

/* Sweeps and experiments; CSV text as written by the harness. */
IL_API il_status il_ib_curve_csv(const il_model* model, const double* bounds, size_t count,
                                 const char* solver, char** out);
IL_API il_status il_dyadic_sweep_csv(const il_model* model, unsigned max_level, char** out);
/* pre_encoder may be NULL. validation 0 selects the default size. */
IL_API il_status il_train_csv(const il_model* model, const char* model_id, const char* arch,
                              size_t n, size_t epochs, uint64_t seed,
                              const il_encoder* pre_encoder, size_t validation, char** out);
IL_API il_status il_study_self_check(il_study_check* out);
/* kind: "fig2", "sweeps" or "measures". spec_json may be NULL. Writes the
 * CSVs into out_dir and returns a short text summary. */
IL_API il_status il_reproduce(const char* kind, const char* spec_json, int full, size_t workers,
                              const char* out_dir, char** summary);

#ifdef __cplusplus
}
#endif

#endif /* INFOLAB_INFOLAB_H_ */
