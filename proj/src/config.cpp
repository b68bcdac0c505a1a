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

#include "flamespec/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <type_traits>
#include <sstream>

#include "flamespec/error.hpp"
#include "flamespec/hash.hpp"
#include "json.hpp"

namespace flamespec {
namespace {

using nlohmann::json;

[[noreturn]] void Invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kConfigInvalid, "config key '" + path + "': " + what);
}

// Walks one JSON object, records every key it reads, and rejects the rest.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) Invalid(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void Get(const char* key, double& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number()) Invalid(Path(key), "expected a number");
      out = v->get<double>();
    }
  }
  template <class T>
    requires(std::is_unsigned_v<T> && !std::is_same_v<T, bool>)
  void Get(const char* key, T& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_unsigned()) Invalid(Path(key), "expected a non-negative integer");
      out = v->get<T>();
    }
  }
  void Get(const char* key, int& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_integer()) Invalid(Path(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void Get(const char* key, bool& out) {
    if (const json* v = Find(key)) {
      if (!v->is_boolean()) Invalid(Path(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void Get(const char* key, std::string& out) {
    if (const json* v = Find(key)) {
      if (!v->is_string()) Invalid(Path(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void Get(const char* key, std::vector<double>& out) {
    if (const json* v = Find(key)) {
      if (!v->is_array()) Invalid(Path(key), "expected an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) Invalid(Path(key), "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  /// Child object; absent keys read as an empty object.
  Reader Child(const char* key) {
    static const json kEmpty = json::object();
    const json* v = Find(key);
    return Reader(v ? *v : kEmpty, Path(key));
  }

  bool Has(const char* key) const { return node_.contains(key); }

  const json* Array(const char* key) {
    const json* v = Find(key);
    if (v && !v->is_array()) Invalid(Path(key), "expected an array");
    return v;
  }

  std::string Path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  /// Call once every known key has been read.
  void Finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) Invalid(Path(it.key()), "unknown key");
    }
  }

 private:
  const json* Find(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void ReadDenoiser(Reader r, DenoiserSpec& d) {
  r.Get("n_layers", d.n_layers);
  r.Get("n_channels", d.n_channels);
  r.Get("kernel_size", d.kernel_size);
  r.Get("downsample", d.downsample);
  r.Get("alpha", d.alpha);
  r.Finish();
}

json DenoiserJson(const DenoiserSpec& d) {
  return {{"n_layers", d.n_layers}, {"n_channels", d.n_channels}, {"kernel_size", d.kernel_size},
          {"downsample", d.downsample}, {"alpha", d.alpha}};
}

json EmitterJson(const EmitterModel& m) {
  json bands = json::array();
  for (const auto& b : m.bands) {
    json lines = json::array();
    for (const auto& l : b.lines) {
      lines.push_back({{"center_nm", l.center_nm},
                       {"relative_amplitude", l.relative_amplitude},
                       {"base_width_nm", l.base_width_nm}});
    }
    bands.push_back({{"name", b.name},
                     {"amplitude", b.amplitude},
                     {"pressure_exponent", b.pressure_exponent},
                     {"phi_exponent", b.phi_exponent},
                     {"broadening_per_bar", b.broadening_per_bar},
                     {"lines", lines}});
  }
  return {{"floor_rate", m.floor_rate}, {"bands", bands}};
}

EmitterModel ReadEmitter(Reader r) {
  EmitterModel m;
  r.Get("floor_rate", m.floor_rate);
  const json* bands = r.Array("bands");
  if (!bands) Invalid(r.Path("bands"), "required");
  for (std::size_t i = 0; i < bands->size(); ++i) {
    Reader b((*bands)[i], r.Path("bands[" + std::to_string(i) + "]"));
    EmissionBand band;
    b.Get("name", band.name);
    b.Get("amplitude", band.amplitude);
    b.Get("pressure_exponent", band.pressure_exponent);
    b.Get("phi_exponent", band.phi_exponent);
    b.Get("broadening_per_bar", band.broadening_per_bar);
    const json* lines = b.Array("lines");
    if (!lines) Invalid(b.Path("lines"), "required");
    for (std::size_t j = 0; j < lines->size(); ++j) {
      Reader l((*lines)[j], b.Path("lines[" + std::to_string(j) + "]"));
      LineComponent line;
      l.Get("center_nm", line.center_nm);
      l.Get("relative_amplitude", line.relative_amplitude);
      l.Get("base_width_nm", line.base_width_nm);
      l.Finish();
      band.lines.push_back(line);
    }
    b.Finish();
    m.bands.push_back(std::move(band));
  }
  r.Finish();
  return m;
}

json ToJson(const Config& c) {
  json rf = json::array();
  for (const auto& d : c.eval.rf_configs) rf.push_back(DenoiserJson(d));
  const auto& s = c.train.scheduler;
  json j = {
      {"seed", c.seed},
      {"grid", {{"start_nm", c.grid.start_nm}, {"end_nm", c.grid.end_nm}, {"n_pixels", c.grid.n_pixels}}},
      {"design",
       {{"train_pressure_levels", c.design.train_pressure_levels},
        {"train_phi_levels", c.design.train_phi_levels},
        {"test_samples", c.design.test_samples},
        {"pressure_lo", c.design.pressure_lo},
        {"pressure_hi", c.design.pressure_hi},
        {"phi_lo", c.design.phi_lo},
        {"phi_hi", c.design.phi_hi},
        {"validation_fraction", c.design.validation_fraction}}},
      {"acquisition",
       {{"n_ls", c.acquisition.n_ls},
        {"n_hs", c.acquisition.n_hs},
        {"n_dark", c.acquisition.n_dark},
        {"tau_ls", c.acquisition.tau_ls},
        {"tau_hs", c.acquisition.tau_hs}}},
      {"ccd",
       {{"quantum_efficiency", c.ccd.quantum_efficiency},
        {"photon_flux_scale", c.ccd.photon_flux_scale},
        {"dark_current_eps", c.ccd.dark_current_eps},
        {"read_noise_e", c.ccd.read_noise_e}}},
      {"emitter_version", c.emitter_version},
      {"calibration",
       {{"pod_rank", c.calibration.pod_rank},
        {"average_hs", c.calibration.average_hs},
        {"kriging",
         {{"theta_lo", c.calibration.kriging.theta_lo},
          {"theta_hi", c.calibration.kriging.theta_hi},
          {"grid_points", c.calibration.kriging.grid_points},
          {"nugget", c.calibration.kriging.nugget},
          {"max_sweeps", c.calibration.kriging.max_sweeps},
          {"min_log_step", c.calibration.kriging.min_log_step}}}}},
      {"denoisers", {{"du", DenoiserJson(c.du)}, {"plain", DenoiserJson(c.plain)}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"augment_lo", c.train.augment_lo},
        {"augment_hi", c.train.augment_hi},
        {"adam", {{"beta1", c.train.adam.beta1}, {"beta2", c.train.adam.beta2}, {"epsilon", c.train.adam.epsilon}}},
        {"scheduler",
         {{"first_cycle_steps", s.first_cycle_steps},
          {"cycle_mult", s.cycle_mult},
          {"max_lr", s.max_lr},
          {"warmup_steps", s.warmup_steps},
          {"gamma", s.gamma}}}}},
      {"eval",
       {{"exposures", c.eval.exposures},
        {"rf_configs", rf},
        {"retrain", c.eval.retrain},
        {"snr_repeats", c.eval.snr_repeats}}},
  };
  if (c.emitter) j["emitter"] = EmitterJson(*c.emitter);
  return j;
}

std::vector<DenoiserSpec> DefaultRfConfigs() {
  // Receptive fields 19 .. 800 pixels around a 424-pixel input.
  return {{3, 8, 7, 1, 0.1}, {3, 8, 7, 2, 0.1}, {3, 8, 7, 4, 0.1},
          {3, 8, 7, 8, 0.1}, {3, 8, 9, 16, 0.1}, {3, 8, 9, 32, 0.1}};
}

}  // namespace

Config Config::DeskScale() {
  Config c;
  c.train.epochs = 30;
  c.train.batch_size = 16;
  c.eval.rf_configs = DefaultRfConfigs();
  return c;
}

Config Config::FullScale() {
  Config c;
  c.grid.n_pixels = 1696;
  c.design.train_pressure_levels = 5;
  c.design.train_phi_levels = 10;
  c.design.test_samples = 30;
  c.acquisition.n_ls = 100;
  c.acquisition.n_hs = 10;
  c.du = {7, 32, 15, 16, 0.1};
  c.plain = {7, 32, 15, 1, 0.0};
  c.train.epochs = 100;
  c.train.batch_size = 128;
  c.eval.rf_configs = {{7, 32, 15, 1, 0.1},  {7, 32, 15, 2, 0.1},  {7, 32, 15, 4, 0.1},
                       {7, 32, 15, 8, 0.1},  {7, 32, 15, 16, 0.1}, {7, 32, 15, 32, 0.1}};
  return c;
}

void Config::Validate() const {
  try {
    grid.Make();
  } catch (const Error& e) {
    Invalid("grid", e.what());
  }
  if (design.train_pressure_levels == 0 || design.train_phi_levels == 0) {
    Invalid("design", "training levels must be >= 1");
  }
  if (design.test_samples == 0) Invalid("design.test_samples", "must be >= 1");
  if (!(design.pressure_lo <= design.pressure_hi && design.phi_lo <= design.phi_hi)) {
    Invalid("design", "ranges must satisfy lo <= hi");
  }
  const GasCondition lo{design.pressure_lo, design.phi_lo}, hi{design.pressure_hi, design.phi_hi};
  if (!lo.InEnvelope() || !hi.InEnvelope()) {
    Invalid("design", "ranges leave the supported envelope (1-10 bar, phi 0.8-1.2)");
  }
  if (!(design.validation_fraction > 0.0 && design.validation_fraction < 1.0)) {
    Invalid("design.validation_fraction", "must be in (0, 1)");
  }
  if (acquisition.n_ls == 0 || acquisition.n_hs == 0 || acquisition.n_dark == 0) {
    Invalid("acquisition", "counts must be >= 1");
  }
  if (!(acquisition.tau_ls > 0.0 && acquisition.tau_ls < acquisition.tau_hs)) {
    Invalid("acquisition", "exposures must satisfy 0 < tau_ls < tau_hs");
  }
  try {
    ccd.Validate();
  } catch (const Error& e) {
    Invalid("ccd", e.what());
  }
  if (emitter_version != EmitterModel::kDefaultVersion) {
    Invalid("emitter_version", "only version " + std::to_string(EmitterModel::kDefaultVersion) +
                                   " is available");
  }
  if (emitter) {
    if (emitter->bands.empty()) Invalid("emitter.bands", "needs at least one band");
    if (!(emitter->floor_rate >= 0.0)) Invalid("emitter.floor_rate", "must be >= 0");
    for (std::size_t i = 0; i < emitter->bands.size(); ++i) {
      const auto& b = emitter->bands[i];
      const std::string path = "emitter.bands[" + std::to_string(i) + "]";
      if (!(b.amplitude > 0.0)) Invalid(path + ".amplitude", "must be > 0");
      if (!(b.broadening_per_bar >= 0.0)) Invalid(path + ".broadening_per_bar", "must be >= 0");
      if (b.lines.empty()) Invalid(path + ".lines", "needs at least one line");
      for (const auto& l : b.lines) {
        if (!(l.relative_amplitude > 0.0 && l.base_width_nm > 0.0)) {
          Invalid(path + ".lines", "amplitudes and widths must be > 0");
        }
      }
    }
  }
  if (calibration.pod_rank == 0) Invalid("calibration.pod_rank", "must be >= 1");
  const auto& k = calibration.kriging;
  if (!(k.theta_lo > 0.0 && k.theta_lo <= k.theta_hi) || k.grid_points == 0 || !(k.nugget >= 0.0)) {
    Invalid("calibration.kriging", "requires 0 < theta_lo <= theta_hi, grid_points >= 1, nugget >= 0");
  }
  auto check_net = [&](const DenoiserSpec& d, const std::string& path) {
    try {
      d.Network(grid.n_pixels).Validate();
    } catch (const Error& e) {
      Invalid(path, e.what());
    }
    if (!(d.alpha >= 0.0 && d.alpha <= 1.0)) Invalid(path + ".alpha", "must be in [0, 1]");
  };
  check_net(du, "denoisers.du");
  check_net(plain, "denoisers.plain");
  for (std::size_t i = 0; i < eval.rf_configs.size(); ++i) {
    check_net(eval.rf_configs[i], "eval.rf_configs[" + std::to_string(i) + "]");
  }
  try {
    train.Validate();
  } catch (const Error& e) {
    Invalid("train", e.what());
  }
  for (double t : eval.exposures) {
    if (!(t > 0.0 && t < acquisition.tau_hs)) Invalid("eval.exposures", "each must be in (0, tau_hs)");
  }
  if (eval.snr_repeats < 30) Invalid("eval.snr_repeats", "must be >= 30");
}

EmitterModel Config::Emitter() const { return emitter ? *emitter : EmitterModel::Default(); }

Config ParseConfig(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  Config c = Config::DeskScale();
  Reader r(root, "");
  r.Get("seed", c.seed);
  {
    Reader g = r.Child("grid");
    g.Get("start_nm", c.grid.start_nm);
    g.Get("end_nm", c.grid.end_nm);
    g.Get("n_pixels", c.grid.n_pixels);
    g.Finish();
  }
  {
    Reader d = r.Child("design");
    d.Get("train_pressure_levels", c.design.train_pressure_levels);
    d.Get("train_phi_levels", c.design.train_phi_levels);
    d.Get("test_samples", c.design.test_samples);
    d.Get("pressure_lo", c.design.pressure_lo);
    d.Get("pressure_hi", c.design.pressure_hi);
    d.Get("phi_lo", c.design.phi_lo);
    d.Get("phi_hi", c.design.phi_hi);
    d.Get("validation_fraction", c.design.validation_fraction);
    d.Finish();
  }
  {
    Reader a = r.Child("acquisition");
    a.Get("n_ls", c.acquisition.n_ls);
    a.Get("n_hs", c.acquisition.n_hs);
    a.Get("n_dark", c.acquisition.n_dark);
    a.Get("tau_ls", c.acquisition.tau_ls);
    a.Get("tau_hs", c.acquisition.tau_hs);
    a.Finish();
  }
  {
    Reader d = r.Child("ccd");
    d.Get("quantum_efficiency", c.ccd.quantum_efficiency);
    d.Get("photon_flux_scale", c.ccd.photon_flux_scale);
    d.Get("dark_current_eps", c.ccd.dark_current_eps);
    d.Get("read_noise_e", c.ccd.read_noise_e);
    d.Finish();
  }
  r.Get("emitter_version", c.emitter_version);
  if (r.Has("emitter")) c.emitter = ReadEmitter(r.Child("emitter"));
  {
    Reader cal = r.Child("calibration");
    cal.Get("pod_rank", c.calibration.pod_rank);
    cal.Get("average_hs", c.calibration.average_hs);
    Reader k = cal.Child("kriging");
    auto& ko = c.calibration.kriging;
    k.Get("theta_lo", ko.theta_lo);
    k.Get("theta_hi", ko.theta_hi);
    k.Get("grid_points", ko.grid_points);
    k.Get("nugget", ko.nugget);
    k.Get("max_sweeps", ko.max_sweeps);
    k.Get("min_log_step", ko.min_log_step);
    k.Finish();
    cal.Finish();
  }
  {
    Reader d = r.Child("denoisers");
    ReadDenoiser(d.Child("du"), c.du);
    ReadDenoiser(d.Child("plain"), c.plain);
    d.Finish();
  }
  {
    Reader t = r.Child("train");
    t.Get("epochs", c.train.epochs);
    t.Get("batch_size", c.train.batch_size);
    t.Get("augment_lo", c.train.augment_lo);
    t.Get("augment_hi", c.train.augment_hi);
    Reader a = t.Child("adam");
    a.Get("beta1", c.train.adam.beta1);
    a.Get("beta2", c.train.adam.beta2);
    a.Get("epsilon", c.train.adam.epsilon);
    a.Finish();
    Reader s = t.Child("scheduler");
    s.Get("first_cycle_steps", c.train.scheduler.first_cycle_steps);
    s.Get("cycle_mult", c.train.scheduler.cycle_mult);
    s.Get("max_lr", c.train.scheduler.max_lr);
    s.Get("warmup_steps", c.train.scheduler.warmup_steps);
    s.Get("gamma", c.train.scheduler.gamma);
    s.Finish();
    t.Finish();
  }
  {
    Reader e = r.Child("eval");
    e.Get("exposures", c.eval.exposures);
    if (const json* arr = e.Array("rf_configs")) {
      c.eval.rf_configs.clear();
      for (std::size_t i = 0; i < arr->size(); ++i) {
        DenoiserSpec d = c.du;
        ReadDenoiser(Reader((*arr)[i], e.Path("rf_configs[" + std::to_string(i) + "]")), d);
        c.eval.rf_configs.push_back(d);
      }
    }
    e.Get("retrain", c.eval.retrain);
    e.Get("snr_repeats", c.eval.snr_repeats);
    e.Finish();
  }
  r.Finish();
  c.train.seed = c.seed;
  c.train.validation_fraction = c.design.validation_fraction;
  c.Validate();
  return c;
}

Config LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string DumpConfig(const Config& config) { return ToJson(config).dump(2) + "\n"; }

std::string GeneratorHash(const Config& config) {
  const json j = ToJson(config);
  Fnv1a h;
  for (const char* key :
       {"seed", "grid", "design", "acquisition", "ccd", "emitter_version", "emitter"}) {
    if (!j.contains(key)) continue;
    h.Update(key);
    h.Update(j.at(key).dump());
  }
  return h.hex();
}

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

}  // namespace flamespec
