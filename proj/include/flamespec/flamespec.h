// Copyright 2026 The flamespec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the flamespec library. Every function returns an fs_status;
 * on failure fs_last_error() describes the cause for the calling thread.
 * Handles are opaque and owned by the caller. */

#ifndef FLAMESPEC_FLAMESPEC_H_
#define FLAMESPEC_FLAMESPEC_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define FS_API __attribute__((visibility("default")))
#else
#define FS_API
#endif

typedef enum fs_status {
  FS_OK = 0,
  FS_ERR_USAGE = 2,   /* bad arguments, config or model/input mismatch */
  FS_ERR_IO = 3,      /* missing, unreadable or malformed files */
  FS_ERR_NUMERIC = 4, /* rank deficiency, singular systems, degenerate data */
  FS_ERR_INTERNAL = 70
} fs_status;

typedef struct fs_config fs_config;
typedef struct fs_model fs_model;

/* Receives one line of progress output (no trailing newline). */
typedef void (*fs_log_fn)(const char* line, void* user);

FS_API const char* fs_version(void);
/* Message of the last failure on this thread; empty after success. */
FS_API const char* fs_last_error(void);
/* Symbolic name of the last failure, e.g. "GridMismatch". */
FS_API const char* fs_last_error_name(void);

/* preset: "desk" or "full". */
FS_API fs_status fs_config_preset(const char* preset, fs_config** out);
FS_API fs_status fs_config_load(const char* path, fs_config** out);
FS_API fs_status fs_config_parse(const char* json_text, fs_config** out);
FS_API fs_status fs_config_set_seed(fs_config* config, uint64_t seed);
/* Copies the resolved config as JSON into buf (NUL-terminated); *needed
 * receives the required size including the terminator. */
FS_API fs_status fs_config_dump(const fs_config* config, char* buf, size_t size, size_t* needed);
FS_API void fs_config_free(fs_config* config);

FS_API fs_status fs_gen(const fs_config* config, const char* out_dir, fs_log_fn log, void* user);
FS_API fs_status fs_calibrate(const fs_config* config, const char* dataset_dir,
                              const char* models_dir, fs_log_fn log, void* user);
/* scheme: "du" or "plain". */
FS_API fs_status fs_train(const fs_config* config, const char* dataset_dir, const char* models_dir,
                          const char* scheme, fs_log_fn log, void* user);

typedef struct fs_predict_options {
  const char* scheme;    /* "raw", "plain" or "du"; NULL means "du" */
  int preprocess;        /* inputs are raw counts */
  const char* dark_path; /* mean dark spectrum, required with preprocess */
  double exposure_s;     /* exposure of raw inputs */
  int with_variance;
} fs_predict_options;

FS_API void fs_predict_options_init(fs_predict_options* options);
/* input: a dataset directory or a text file with one spectrum per line.
 * out_path NULL or "" sends the table to the log callback. */
FS_API fs_status fs_predict(const char* models_dir, const char* input,
                            const fs_predict_options* options, const char* out_path,
                            fs_log_fn log, void* user);
/* sweep: NULL or "" for the scheme table, "rf" or "exposure". */
FS_API fs_status fs_eval(const fs_config* config, const char* dataset_dir, const char* models_dir,
                         const char* out_dir, const char* sweep, fs_log_fn log, void* user);
FS_API fs_status fs_report(const char* out_dir, fs_log_fn log, void* user);

/* In-memory inference: load archives from a models directory once and
 * predict (pressure, phi) for OH-normalized spectra. */
FS_API fs_status fs_model_load(const char* models_dir, const char* scheme, fs_model** out);
FS_API size_t fs_model_width(const fs_model* model);
/* spectra: n rows of fs_model_width() values. out: n rows of
 * (P, phi, var_P, var_phi). */
FS_API fs_status fs_model_predict(const fs_model* model, const double* spectra, size_t n,
                                  double* out);
FS_API void fs_model_free(fs_model* model);

/* Architecture calculators. */
FS_API fs_status fs_calc_rf(size_t n_layers, size_t kernel_size, size_t downsample,
                            size_t width, size_t* out);
FS_API fs_status fs_calc_params(size_t n_layers, size_t n_channels, size_t kernel_size,
                                size_t downsample, size_t* out);

#ifdef __cplusplus
}
#endif

#endif /* FLAMESPEC_FLAMESPEC_H_ */
