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

#include "flamespec/flamespec.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "flamespec/archive.hpp"
#include "flamespec/config.hpp"
#include "flamespec/error.hpp"
#include "flamespec/pipeline.hpp"
#include "flamespec/version.hpp"

struct fs_config {
  flamespec::Config value;
};

struct fs_model {
  flamespec::PodModel pod;
  flamespec::KrigingModel kriging;
  std::optional<flamespec::dnn::DenoiserNet> net;
};

namespace {

using flamespec::Error;
using flamespec::ErrorCode;

thread_local std::string g_error;
thread_local std::string g_error_name;

fs_status Fail(fs_status status, std::string name, std::string message) {
  g_error_name = std::move(name);
  g_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
fs_status Guard(F&& body) {
  try {
    body();
    g_error.clear();
    g_error_name.clear();
    return FS_OK;
  } catch (const Error& e) {
    return Fail(static_cast<fs_status>(e.error_class()), std::string(ErrorCodeName(e.code())),
                e.what());
  } catch (const std::bad_alloc&) {
    return Fail(FS_ERR_NUMERIC, "OutOfMemory", "out of memory");
  } catch (const std::exception& e) {
    return Fail(FS_ERR_INTERNAL, "Internal", e.what());
  } catch (...) {
    return Fail(FS_ERR_INTERNAL, "Internal", "unknown failure");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kUsage, std::string(what) + " must not be null");
}

flamespec::Logger Wrap(fs_log_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](std::string_view line) {
    const std::string s(line);
    fn(s.c_str(), user);
  };
}

std::string Str(const char* s) { return s ? s : ""; }

}  // namespace

extern "C" {

const char* fs_version(void) { return flamespec::kToolVersion; }
const char* fs_last_error(void) { return g_error.c_str(); }
const char* fs_last_error_name(void) { return g_error_name.c_str(); }

fs_status fs_config_preset(const char* preset, fs_config** out) {
  return Guard([&] {
    Require(preset && out, "preset and out");
    const std::string p = preset;
    if (p == "desk") {
      *out = new fs_config{flamespec::Config::DeskScale()};
    } else if (p == "full") {
      *out = new fs_config{flamespec::Config::FullScale()};
    } else {
      throw Error(ErrorCode::kUsage, "unknown preset '" + p + "' (expected desk or full)");
    }
  });
}

fs_status fs_config_load(const char* path, fs_config** out) {
  return Guard([&] {
    Require(path && out, "path and out");
    *out = new fs_config{flamespec::LoadConfig(path)};
  });
}

fs_status fs_config_parse(const char* json_text, fs_config** out) {
  return Guard([&] {
    Require(json_text && out, "json_text and out");
    *out = new fs_config{flamespec::ParseConfig(json_text)};
  });
}

fs_status fs_config_set_seed(fs_config* config, uint64_t seed) {
  return Guard([&] {
    Require(config, "config");
    config->value.seed = seed;
    config->value.train.seed = seed;
  });
}

fs_status fs_config_dump(const fs_config* config, char* buf, size_t size, size_t* needed) {
  return Guard([&] {
    Require(config, "config");
    const std::string text = flamespec::DumpConfig(config->value);
    if (needed) *needed = text.size() + 1;
    if (buf && size > 0) {
      const size_t n = std::min(size - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

void fs_config_free(fs_config* config) { delete config; }

fs_status fs_gen(const fs_config* config, const char* out_dir, fs_log_fn log, void* user) {
  return Guard([&] {
    Require(config && out_dir, "config and out_dir");
    flamespec::CmdGen(config->value, out_dir, Wrap(log, user));
  });
}

fs_status fs_calibrate(const fs_config* config, const char* dataset_dir, const char* models_dir,
                       fs_log_fn log, void* user) {
  return Guard([&] {
    Require(config && dataset_dir && models_dir, "config, dataset_dir and models_dir");
    flamespec::CmdCalibrate(config->value, dataset_dir, models_dir, Wrap(log, user));
  });
}

fs_status fs_train(const fs_config* config, const char* dataset_dir, const char* models_dir,
                   const char* scheme, fs_log_fn log, void* user) {
  return Guard([&] {
    Require(config && dataset_dir && models_dir && scheme,
            "config, dataset_dir, models_dir and scheme");
    flamespec::CmdTrain(config->value, dataset_dir, models_dir, scheme, Wrap(log, user));
  });
}

void fs_predict_options_init(fs_predict_options* options) {
  if (!options) return;
  const flamespec::PredictOptions d;
  options->scheme = "du";
  options->preprocess = d.preprocess ? 1 : 0;
  options->dark_path = nullptr;
  options->exposure_s = d.exposure_s;
  options->with_variance = d.with_variance ? 1 : 0;
}

fs_status fs_predict(const char* models_dir, const char* input, const fs_predict_options* options,
                     const char* out_path, fs_log_fn log, void* user) {
  return Guard([&] {
    Require(models_dir && input, "models_dir and input");
    flamespec::PredictOptions o;
    if (options) {
      if (options->scheme) o.scheme = options->scheme;
      o.preprocess = options->preprocess != 0;
      o.dark_path = Str(options->dark_path);
      o.exposure_s = options->exposure_s;
      o.with_variance = options->with_variance != 0;
    }
    flamespec::CmdPredict(models_dir, input, o, Str(out_path), Wrap(log, user));
  });
}

fs_status fs_eval(const fs_config* config, const char* dataset_dir, const char* models_dir,
                  const char* out_dir, const char* sweep, fs_log_fn log, void* user) {
  return Guard([&] {
    Require(config && dataset_dir && models_dir && out_dir,
            "config, dataset_dir, models_dir and out_dir");
    flamespec::CmdEval(config->value, dataset_dir, models_dir, out_dir, Str(sweep),
                       Wrap(log, user));
  });
}

fs_status fs_report(const char* out_dir, fs_log_fn log, void* user) {
  return Guard([&] {
    Require(out_dir, "out_dir");
    flamespec::CmdReport(out_dir, Wrap(log, user));
  });
}

fs_status fs_model_load(const char* models_dir, const char* scheme, fs_model** out) {
  return Guard([&] {
    Require(models_dir && out, "models_dir and out");
    namespace fsys = std::filesystem;
    const fsys::path dir = models_dir;
    const std::string s = scheme ? scheme : "du";
    const auto pa = flamespec::ModelArchive::Load(dir / flamespec::kPodArchive);
    const auto ka = flamespec::ModelArchive::Load(dir / flamespec::kKrigingArchive);
    const std::string hash = pa.provenance().dataset_hash;
    pa.Expect(flamespec::kPodKind, hash);
    ka.Expect(flamespec::kKrigingKind, hash);
    std::optional<flamespec::dnn::DenoiserNet> net;
    if (s != "raw") {
      if (s != "du" && s != "plain") {
        throw Error(ErrorCode::kUsage, "scheme must be raw, plain or du");
      }
      const auto da = flamespec::ModelArchive::Load(dir / flamespec::DenoiserArchiveName(s));
      da.Expect(flamespec::kDenoiserKind, hash);
      net = flamespec::DenoiserFromArchive(da);
    }
    *out = new fs_model{flamespec::PodFromArchive(pa), flamespec::KrigingFromArchive(ka),
                        std::move(net)};
  });
}

size_t fs_model_width(const fs_model* model) { return model ? model->pod.width() : 0; }

fs_status fs_model_predict(const fs_model* model, const double* spectra, size_t n, double* out) {
  return Guard([&] {
    Require(model && (n == 0 || (spectra && out)), "model, spectra and out");
    const size_t w = model->pod.width();
    for (size_t i = 0; i < n; ++i) {
      std::span<const double> x(spectra + i * w, w);
      std::vector<double> y;
      if (model->net) {
        y = model->net->Denoise(x);
        x = y;
      }
      const auto pred = model->kriging.Predict(model->pod.NormalizedCoeffs(x));
      out[4 * i + 0] = pred.mean(0);
      out[4 * i + 1] = pred.mean(1);
      out[4 * i + 2] = pred.variance(0);
      out[4 * i + 3] = pred.variance(1);
    }
  });
}

void fs_model_free(fs_model* model) { delete model; }

fs_status fs_calc_rf(size_t n_layers, size_t kernel_size, size_t downsample, size_t width,
                     size_t* out) {
  return Guard([&] {
    Require(out, "out");
    flamespec::dnn::NetworkConfig c{n_layers, 1, kernel_size, downsample, width ? width : 1};
    c.Validate();
    size_t rf = flamespec::dnn::ReceptiveField(c);
    if (width) rf = std::min(rf, c.padded_width());
    *out = rf;
  });
}

fs_status fs_calc_params(size_t n_layers, size_t n_channels, size_t kernel_size,
                         size_t downsample, size_t* out) {
  return Guard([&] {
    Require(out, "out");
    flamespec::dnn::NetworkConfig c{n_layers, n_channels, kernel_size, downsample, downsample};
    c.Validate();
    *out = flamespec::dnn::ParamCount(c);
  });
}

}  // extern "C"
