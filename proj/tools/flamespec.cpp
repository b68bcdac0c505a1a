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

// flamespec command-line tool. A thin shell over the C API.

#include <cstdio>
#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flamespec/flamespec.h"

namespace {

void PrintLine(const char* line, void*) { std::printf("%s\n", line); }

int Report(fs_status s) {
  if (s != FS_OK) std::fprintf(stderr, "flamespec: %s\n", fs_last_error());
  return s == FS_ERR_INTERNAL ? 1 : int(s);
}

struct ConfigArgs {
  std::string path;
  std::string preset = "desk";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void AddConfigFlags(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("--config", a.path, "JSON config file (defaults to the --preset values)");
  cmd->add_option("--preset", a.preset, "Built-in config when --config is absent")
      ->check(CLI::IsMember({"desk", "full"}));
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&a](std::uint64_t s) { a.seed = s, a.seed_set = true; },
      "Override the config seed");
}

// Owns an fs_config built from the flags.
class ConfigHandle {
 public:
  ~ConfigHandle() { fs_config_free(cfg_); }
  fs_status Build(const ConfigArgs& a) {
    fs_status s = a.path.empty() ? fs_config_preset(a.preset.c_str(), &cfg_)
                                 : fs_config_load(a.path.c_str(), &cfg_);
    if (s == FS_OK && a.seed_set) s = fs_config_set_seed(cfg_, a.seed);
    return s;
  }
  const fs_config* get() const { return cfg_; }

 private:
  fs_config* cfg_ = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flame emission spectra: synthetic data, denoising and P/phi prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fs_version()));

  ConfigArgs cfg_args;
  std::string out, dataset, models, scheme = "du", sweep, input, dark;
  bool preprocess = false, no_variance = false;
  double exposure = 0.2;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  AddConfigFlags(gen, cfg_args);
  gen->add_option("--out", out, "Dataset directory")->required();

  auto* cal = app.add_subcommand("calibrate", "Fit POD bases and the kriging surrogate");
  AddConfigFlags(cal, cfg_args);
  cal->add_option("--dataset", dataset, "Dataset directory")->required();
  cal->add_option("--out", out, "Models directory")->required();

  auto* train = app.add_subcommand("train", "Train a denoiser");
  AddConfigFlags(train, cfg_args);
  train->add_option("--dataset", dataset, "Dataset directory")->required();
  train->add_option("--out", out, "Models directory holding pod.fsa")->required();
  train->add_option("--scheme", scheme, "Denoiser to train")
      ->check(CLI::IsMember({"du", "plain"}));

  auto* pred = app.add_subcommand("predict", "Predict pressure and equivalence ratio");
  pred->add_option("--models", models, "Models directory")->required();
  pred->add_option("input", input, "Dataset directory or text file, one spectrum per line")
      ->required();
  pred->add_option("--scheme", scheme, "Pipeline")->check(CLI::IsMember({"raw", "plain", "du"}));
  pred->add_flag("--preprocess", preprocess, "Inputs are raw counts; subtract --dark, normalize");
  pred->add_option("--dark", dark, "Mean dark spectrum (one line)");
  pred->add_option("--exposure", exposure, "Exposure of raw inputs in seconds");
  pred->add_flag("--no-variance", no_variance, "Omit kriging variance columns");
  pred->add_option("--out", out, "Output table (stdout when absent)");

  auto* ev = app.add_subcommand("eval", "Compare schemes or run a sweep");
  AddConfigFlags(ev, cfg_args);
  ev->add_option("--dataset", dataset, "Dataset directory")->required();
  ev->add_option("--models", models, "Models directory")->required();
  ev->add_option("--out", out, "Results directory")->required();
  ev->add_option("--sweep", sweep, "Sweep to run instead of the scheme table")
      ->check(CLI::IsMember({"rf", "exposure"}));

  auto* rep = app.add_subcommand("report", "Write summary.md from result tables");
  rep->add_option("--out", out, "Results directory")->required();

  auto* calc = app.add_subcommand("calc", "Architecture calculators");
  calc->require_subcommand(1);
  std::size_t layers = 7, channels = 32, kernel = 15, down = 16, width = 0;
  auto* rf = calc->add_subcommand("rf", "Receptive field N_d (N_l (N_k - 1) + 1)");
  auto* params = calc->add_subcommand("params", "Convolution weight and bias count");
  for (auto* c : {rf, params}) {
    c->add_option("--layers", layers, "N_l")->capture_default_str();
    c->add_option("--kernel", kernel, "N_k")->capture_default_str();
    c->add_option("--downsample", down, "N_d")->capture_default_str();
  }
  rf->add_option("--width", width, "Clip at the padded signal width (0 = no clip)");
  params->add_option("--channels", channels, "N_c")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ConfigHandle cfg;
  const bool needs_config = gen->parsed() || cal->parsed() || train->parsed() || ev->parsed();
  if (needs_config) {
    if (const fs_status s = cfg.Build(cfg_args); s != FS_OK) return Report(s);
  }

  if (gen->parsed()) return Report(fs_gen(cfg.get(), out.c_str(), PrintLine, nullptr));
  if (cal->parsed()) {
    return Report(fs_calibrate(cfg.get(), dataset.c_str(), out.c_str(), PrintLine, nullptr));
  }
  if (train->parsed()) {
    return Report(
        fs_train(cfg.get(), dataset.c_str(), out.c_str(), scheme.c_str(), PrintLine, nullptr));
  }
  if (pred->parsed()) {
    fs_predict_options o;
    fs_predict_options_init(&o);
    o.scheme = scheme.c_str();
    o.preprocess = preprocess;
    o.dark_path = dark.empty() ? nullptr : dark.c_str();
    o.exposure_s = exposure;
    o.with_variance = !no_variance;
    return Report(fs_predict(models.c_str(), input.c_str(), &o, out.c_str(), PrintLine, nullptr));
  }
  if (ev->parsed()) {
    return Report(fs_eval(cfg.get(), dataset.c_str(), models.c_str(), out.c_str(), sweep.c_str(),
                          PrintLine, nullptr));
  }
  if (rep->parsed()) return Report(fs_report(out.c_str(), PrintLine, nullptr));

  std::size_t value = 0;
  const fs_status s = rf->parsed() ? fs_calc_rf(layers, kernel, down, width, &value)
                                   : fs_calc_params(layers, channels, kernel, down, &value);
  if (s == FS_OK) std::printf("%zu\n", value);
  return Report(s);
}
