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

#include "flamespec/pipeline.hpp"

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "flamespec/archive.hpp"
#include "flamespec/error.hpp"
#include "flamespec/synthgen.hpp"
#include "flamespec/version.hpp"

namespace flamespec {
namespace {

namespace fs = std::filesystem;

constexpr const char* kLockFile = ".flamespec.lock";
constexpr std::uint64_t kTrainStream = 0x545241494e;  // per-scheme training seeds
constexpr std::uint64_t kSnrStream = 0x534e52;

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string Num(double v) { return Fmt("%.6f", v); }

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Provenance MakeProvenance(const Config& config, const Dataset& dataset) {
  return {dataset.Hash(), config.seed, kToolVersion};
}

void Log(const Logger& log, const std::string& line) {
  if (log) log(line);
}

std::uint64_t SchemeTag(std::string_view scheme) {
  std::uint64_t t = 0;
  for (char c : scheme) t = t * 131 + std::uint64_t(static_cast<unsigned char>(c));
  return t;
}

dnn::TrainConfig SchemeTrainConfig(const Config& config, std::string_view scheme, double alpha) {
  dnn::TrainConfig tc = config.train;
  tc.alpha = alpha;
  tc.seed = StreamSeed(config.seed, kTrainStream, SchemeTag(scheme));
  return tc;
}

struct LoadedModels {
  PodModel pod;
  KrigingModel kriging;
  std::string dataset_hash;
  std::optional<WavelengthGrid> grid;
};

LoadedModels LoadSurrogate(const fs::path& models_dir) {
  const auto pa = ModelArchive::Load(models_dir / kPodArchive);
  const auto ka = ModelArchive::Load(models_dir / kKrigingArchive);
  pa.Expect(kPodKind, pa.provenance().dataset_hash);
  ka.Expect(kKrigingKind, pa.provenance().dataset_hash);
  return {PodFromArchive(pa), KrigingFromArchive(ka), pa.provenance().dataset_hash,
          PodGridFromArchive(pa)};
}

dnn::DenoiserNet LoadDenoiser(const fs::path& models_dir, std::string_view scheme,
                              std::string_view dataset_hash) {
  const auto a = ModelArchive::Load(models_dir / DenoiserArchiveName(scheme));
  a.Expect(kDenoiserKind, dataset_hash);
  return DenoiserFromArchive(a);
}

std::string SchemeTable(const std::vector<eval::SchemeResult>& results) {
  std::string t = "scheme\tP_REC\tP_REP\tP_RSD\tphi_REC\tphi_REP\tphi_RSD\n";
  for (const auto& r : results) {
    t += r.scheme + "\t" + Num(r.pressure_calibration.relative_error) + "\t" +
         Num(r.pressure_prediction.relative_error) + "\t" + Num(r.pressure_prediction.rsd) + "\t" +
         Num(r.phi_calibration.relative_error) + "\t" + Num(r.phi_prediction.relative_error) + "\t" +
         Num(r.phi_prediction.rsd) + "\n";
  }
  return t;
}

std::string ConditionTable(const std::vector<eval::SchemeResult>& results) {
  std::string t = "scheme\trole\tP_true\tphi_true\tn\tP_mean\tP_std\tphi_mean\tphi_std\n";
  for (const auto& r : results) {
    for (const auto& row : r.rows) {
      t += r.scheme + "\t" + (row.is_test ? "test" : "calibration") + "\t" +
           Num(row.truth.pressure_bar) + "\t" + Num(row.truth.equivalence_ratio) + "\t" +
           std::to_string(row.n) + "\t" + Num(row.pressure_mean) + "\t" + Num(row.pressure_std) +
           "\t" + Num(row.phi_mean) + "\t" + Num(row.phi_std) + "\n";
    }
  }
  return t;
}

std::vector<std::vector<double>> ReadSpectraText(const fs::path& path) {
  std::istringstream in(ReadText(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (char& c : line) {
      if (c == ',' || c == '\t' || c == ';') c = ' ';
    }
    std::istringstream ls(line);
    std::vector<double> v;
    std::string tok;
    while (ls >> tok) {
      char* end = nullptr;
      errno = 0;
      const double x = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
        throw Error(ErrorCode::kFormat,
                    path.string() + ":" + std::to_string(lineno) + ": not a number: '" + tok + "'");
      }
      v.push_back(x);
    }
    if (!v.empty()) rows.push_back(std::move(v));
  }
  return rows;
}

// Monte-Carlo SNR of the 308 nm pixel at (10 bar, phi = 1).
double OhPixelSnr(const Config& config, double tau) {
  const WavelengthGrid grid = config.grid.Make();
  const auto rate = CleanSpectrum({10.0, 1.0}, grid, config.Emitter());
  const std::size_t pixel = grid.nearest_pixel(308.0);
  std::vector<Spectrum> raw;
  raw.reserve(config.eval.snr_repeats);
  for (std::size_t i = 0; i < config.eval.snr_repeats; ++i) {
    raw.push_back(Acquire(grid, rate, tau, config.ccd,
                          StreamSeed(config.seed, kSnrStream, std::bit_cast<std::uint64_t>(tau), i)));
  }
  return eval::EmpiricalSnr(raw, pixel, ExpectedDark(grid, tau, config.ccd));
}

std::string DescribeNet(const DenoiserSpec& d) {
  return "N_l=" + std::to_string(d.n_layers) + " N_c=" + std::to_string(d.n_channels) +
         " N_k=" + std::to_string(d.kernel_size) + " N_d=" + std::to_string(d.downsample) +
         " alpha=" + Fmt("%g", d.alpha);
}

}  // namespace

std::string DenoiserArchiveName(std::string_view scheme) {
  return "denoiser_" + std::string(scheme) + ".fsa";
}

std::string TrainLogName(std::string_view scheme) {
  return "train_log_" + std::string(scheme) + ".tsv";
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / kLockFile) {
  EnsureDir(dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    if (errno == EEXIST) {
      throw Error(ErrorCode::kIo, dir.string() + " is in use by another flamespec process (delete " +
                                      path_.string() + " if it is stale)");
    }
    throw Error(ErrorCode::kIo, "cannot create " + path_.string() + ": " + std::strerror(errno));
  }
  std::fclose(f);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

const DenoiserSpec& SchemeSpec(const Config& config, std::string_view scheme) {
  if (scheme == "du") return config.du;
  if (scheme == "plain") return config.plain;
  throw Error(ErrorCode::kUsage, "unknown denoiser scheme '" + std::string(scheme) +
                                     "' (expected du or plain)");
}

Calibration FitCalibration(const Config& config, const Dataset& dataset) {
  std::vector<std::vector<double>> rows;
  std::vector<GasCondition> truth;
  for (Role role : {Role::kTrain, Role::kValidation}) {
    for (const auto& cs : dataset.Samples(role)) {
      if (cs.high_snr.empty()) continue;
      if (config.calibration.average_hs) {
        std::vector<double> mean(cs.high_snr.front().size(), 0.0);
        for (const auto& h : cs.high_snr) {
          for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += h[i];
        }
        for (double& v : mean) v /= double(cs.high_snr.size());
        rows.push_back(std::move(mean));
        truth.push_back(cs.condition);
      } else {
        for (const auto& h : cs.high_snr) {
          rows.push_back(h);
          truth.push_back(cs.condition);
        }
      }
    }
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no high-SNR training spectra");

  const auto w = Eigen::Index(rows.front().size());
  Eigen::MatrixXd snaps(Eigen::Index(rows.size()), w);
  Eigen::MatrixXd targets(Eigen::Index(rows.size()), 2);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    snaps.row(Eigen::Index(r)) = Eigen::Map<const Eigen::RowVectorXd>(rows[r].data(), w);
    targets(Eigen::Index(r), 0) = truth[r].pressure_bar;
    targets(Eigen::Index(r), 1) = truth[r].equivalence_ratio;
  }
  std::optional<PodModel> pod;
  try {
    pod = PodModel::Fit(snaps, config.calibration.pod_rank);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kRankDeficient) throw;
    throw Error(ErrorCode::kRankDeficient,
                std::string(e.what()) + " (lower calibration.pod_rank or add training conditions)");
  }
  Eigen::MatrixXd sites(snaps.rows(), Eigen::Index(pod->rank()));
  for (Eigen::Index r = 0; r < snaps.rows(); ++r) {
    sites.row(r) = pod->NormalizeCoeffs(pod->bases() * snaps.row(r).transpose()).transpose();
  }
  KrigingModel kriging = KrigingModel::Fit(sites, targets, config.calibration.kriging);

  // Self-check: predictions at the calibration snapshots, grouped by condition.
  std::vector<eval::ConditionPredictions> p, f;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto pred = kriging.Predict(sites.row(Eigen::Index(r)).transpose());
    if (r == 0 || !(truth[r] == truth[r - 1])) {
      p.push_back({truth[r].pressure_bar, {}});
      f.push_back({truth[r].equivalence_ratio, {}});
    }
    p.back().predictions.push_back(pred.mean(0));
    f.back().predictions.push_back(pred.mean(1));
  }
  return {std::move(*pod), std::move(kriging), eval::Metrics(p), eval::Metrics(f)};
}

dnn::TrainResult TrainScheme(const Config& config, const Dataset& dataset, const PodModel& pod,
                             std::string_view scheme) {
  const DenoiserSpec& spec = SchemeSpec(config, scheme);
  const auto train = dataset.Samples(Role::kTrain);
  if (train.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no training conditions");
  return dnn::Train(train, dataset.Samples(Role::kValidation), spec.Network(config.grid.n_pixels),
                    SchemeTrainConfig(config, scheme, spec.alpha), pod);
}

std::vector<eval::EvalCondition> EvalConditions(const Dataset& dataset,
                                                const std::vector<Role>& roles) {
  std::vector<eval::EvalCondition> out;
  for (Role role : roles) {
    for (auto& cs : dataset.Samples(role)) out.push_back({cs.condition, std::move(cs.low_snr)});
  }
  return out;
}

std::vector<eval::SchemeResult> CompareAll(const Dataset& dataset, const Calibration& cal,
                                           const dnn::DenoiserNet& plain,
                                           const dnn::DenoiserNet& du) {
  return eval::CompareSchemes(EvalConditions(dataset, {Role::kTrain, Role::kValidation}),
                              EvalConditions(dataset, {Role::kTest}), cal.pod, cal.kriging,
                              {{"raw", nullptr}, {"plain", &plain}, {"du", &du}});
}

void CmdGen(const Config& config, const fs::path& out_dir, const Logger& log) {
  DirectoryLock lock(out_dir);
  const Dataset ds = Dataset::Build(config);
  ds.Save(out_dir);
  std::map<Role, std::size_t> per_role;
  std::map<std::size_t, Role> seen;
  for (const auto& r : ds.manifest().records) seen[r.condition_index] = r.role;
  for (const auto& [_, role] : seen) per_role[role]++;
  Log(log, "conditions: " + std::to_string(ds.ConditionCount()) + " (train " +
               std::to_string(per_role[Role::kTrain]) + ", validation " +
               std::to_string(per_role[Role::kValidation]) + ", test " +
               std::to_string(per_role[Role::kTest]) + ")");
  Log(log, "spectra: " + std::to_string(ds.manifest().records.size()) + " (" +
               std::to_string(config.acquisition.n_ls) + " LS x " +
               std::to_string(config.acquisition.n_hs) + " HS per condition)");
  Log(log, "pairs: " + std::to_string(ds.PairCount()) + " (" +
               std::to_string(ds.TrainingPairCount()) + " in training conditions)");
  Log(log, "disk: " + std::to_string(ds.BlobBytes() + ds.ManifestText().size()) + " bytes");
  Log(log, "dataset hash: " + ds.Hash());
}

void CmdCalibrate(const Config& config, const fs::path& dataset_dir, const fs::path& models_dir,
                  const Logger& log) {
  const Dataset ds = Dataset::Load(dataset_dir);
  DirectoryLock lock(models_dir);
  const Calibration cal = FitCalibration(config, ds);
  const Provenance prov = MakeProvenance(config, ds);
  const WavelengthGrid grid = ds.grid();
  PodToArchive(cal.pod, prov, &grid).Save(models_dir / kPodArchive);
  KrigingToArchive(cal.kriging, prov).Save(models_dir / kKrigingArchive);

  std::string table = "mode\tsingular_value\tenergy_fraction\tcumulative\n";
  double cum = 0.0;
  Log(log, "POD energy (mode, fraction, cumulative):");
  for (std::size_t j = 0; j < cal.pod.rank(); ++j) {
    const double e = cal.pod.energy_fraction()(Eigen::Index(j));
    cum += e;
    table += std::to_string(j + 1) + "\t" + Fmt("%.9g", cal.pod.singular_values()(Eigen::Index(j))) +
             "\t" + Fmt("%.9f", e) + "\t" + Fmt("%.9f", cum) + "\n";
    Log(log, "  " + std::to_string(j + 1) + "  " + Fmt("%.6f", e) + "  " + Fmt("%.6f", cum));
  }
  WriteText(models_dir / "energy.tsv", table);
  Log(log, "kriging sites: " + std::to_string(cal.kriging.n_sites()));
  for (Eigen::Index o = 0; o < cal.kriging.theta().cols(); ++o) {
    std::string line = std::string("  theta[") + (o == 0 ? "P" : "phi") + "]:";
    for (Eigen::Index d = 0; d < cal.kriging.theta().rows(); ++d) {
      line += " " + Fmt("%.4g", cal.kriging.theta()(d, o));
    }
    Log(log, line);
  }
  Log(log, "calibration REC: P " + Fmt("%.4f", cal.pressure_rec.relative_error) + "%, phi " +
               Fmt("%.4f", cal.phi_rec.relative_error) + "%");
}

void CmdTrain(const Config& config, const fs::path& dataset_dir, const fs::path& models_dir,
              std::string_view scheme, const Logger& log) {
  const DenoiserSpec& spec = SchemeSpec(config, scheme);
  const Dataset ds = Dataset::Load(dataset_dir);
  DirectoryLock lock(models_dir);
  const auto pa = ModelArchive::Load(models_dir / kPodArchive);
  pa.Expect(kPodKind, ds.Hash());
  const PodModel pod = PodFromArchive(pa);
  Log(log, "training " + std::string(scheme) + ": " + DescribeNet(spec) + ", " +
               std::to_string(config.train.epochs) + " epochs, batch " +
               std::to_string(config.train.batch_size));
  const auto result = TrainScheme(config, ds, pod, scheme);

  std::string table = "epoch\tstep\tlr\ttrain_loss\tvalidation_loss\n";
  for (const auto& e : result.log) {
    table += std::to_string(e.epoch) + "\t" + std::to_string(e.step) + "\t" + Fmt("%.9g", e.lr) +
             "\t" + Fmt("%.9g", e.train_loss) + "\t" + Fmt("%.9g", e.validation_loss) + "\n";
    Log(log, "  epoch " + std::to_string(e.epoch) + "  lr " + Fmt("%.6f", e.lr) + "  train " +
                 Fmt("%.5f", e.train_loss) + "  val " + Fmt("%.5f", e.validation_loss));
  }
  WriteText(models_dir / TrainLogName(scheme), table);
  DenoiserToArchive(result, scheme, spec.alpha, MakeProvenance(config, ds))
      .Save(models_dir / DenoiserArchiveName(scheme));
  Log(log, "best epoch: " + std::to_string(result.best_epoch));
}

void CmdPredict(const fs::path& models_dir, const fs::path& input, const PredictOptions& options,
                const fs::path& out_path, const Logger& log) {
  LoadedModels m = LoadSurrogate(models_dir);
  std::optional<dnn::DenoiserNet> net;
  if (options.scheme != "raw") {
    if (options.scheme != "du" && options.scheme != "plain") {
      throw Error(ErrorCode::kUsage, "--scheme must be raw, plain or du");
    }
    net = LoadDenoiser(models_dir, options.scheme, m.dataset_hash);
  }
  const eval::Scheme scheme{options.scheme, net ? &*net : nullptr};

  std::vector<std::vector<double>> spectra;
  std::vector<GasCondition> truth;
  if (fs::is_directory(input)) {
    const Dataset ds = Dataset::Load(input);
    if (ds.Hash() != m.dataset_hash) {
      Log(log, "note: input dataset differs from the calibration dataset");
    }
    for (const auto& r : ds.manifest().records) {
      if (r.role == Role::kTest && r.snr == SnrClass::kLow) {
        spectra.push_back(ds.Values(r));
        truth.push_back(r.condition);
      }
    }
  } else {
    spectra = ReadSpectraText(input);
    if (spectra.empty()) throw Error(ErrorCode::kEmptyInput, input.string() + " holds no spectra");
    if (options.preprocess) {
      if (options.dark_path.empty()) {
        throw Error(ErrorCode::kUsage, "--preprocess needs --dark with a mean dark spectrum");
      }
      const auto darks = ReadSpectraText(options.dark_path);
      if (darks.size() != 1) throw Error(ErrorCode::kFormat, "dark file must hold one spectrum");
      for (auto& s : spectra) {
        if (s.size() != darks[0].size()) {
          throw Error(ErrorCode::kGridMismatch, "raw spectrum and dark differ in length");
        }
        // Older archives carry no grid; assume the default span.
        const WavelengthGrid grid =
            m.grid ? *m.grid : WavelengthGrid(250.0, 850.0, s.size());
        if (grid.n_pixels() != s.size()) {
          throw Error(ErrorCode::kGridMismatch, "input has " + std::to_string(s.size()) +
                                                    " pixels, models expect " +
                                                    std::to_string(grid.n_pixels()));
        }
        const Spectrum raw(grid, s, options.exposure_s, Stage::kRawCounts);
        const Spectrum dark(grid, darks[0], options.exposure_s, Stage::kRawCounts);
        const Spectrum pre = Preprocess(raw, dark);
        s.assign(pre.intensities().begin(), pre.intensities().end());
      }
    }
  }
  for (const auto& s : spectra) {
    if (s.size() != m.pod.width()) {
      throw Error(ErrorCode::kGridMismatch, "spectrum has " + std::to_string(s.size()) +
                                                " pixels, models expect " +
                                                std::to_string(m.pod.width()));
    }
  }

  std::string t = "index\tP_pred\tphi_pred";
  if (options.with_variance) t += "\tP_var\tphi_var";
  if (!truth.empty()) t += "\tP_true\tphi_true";
  t += "\n";
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const auto y = scheme.net ? scheme.net->Denoise(spectra[i]) : spectra[i];
    const auto pred = m.kriging.Predict(m.pod.NormalizedCoeffs(y));
    t += std::to_string(i) + "\t" + Num(pred.mean(0)) + "\t" + Num(pred.mean(1));
    if (options.with_variance) t += "\t" + Fmt("%.6g", pred.variance(0)) + "\t" + Fmt("%.6g", pred.variance(1));
    if (!truth.empty()) t += "\t" + Num(truth[i].pressure_bar) + "\t" + Num(truth[i].equivalence_ratio);
    t += "\n";
  }
  if (out_path.empty()) {
    Log(log, t);
  } else {
    WriteText(out_path, t);
    Log(log, "wrote " + std::to_string(spectra.size()) + " predictions to " + out_path.string());
  }
}

void CmdEval(const Config& config, const fs::path& dataset_dir, const fs::path& models_dir,
             const fs::path& out_dir, std::string_view sweep, const Logger& log) {
  const Dataset ds = Dataset::Load(dataset_dir);
  LoadedModels m = LoadSurrogate(models_dir);
  if (m.dataset_hash != ds.Hash()) {
    throw Error(ErrorCode::kProvenanceMismatch,
                "models were calibrated on dataset " + m.dataset_hash + ", not " + ds.Hash());
  }
  DirectoryLock lock(out_dir);

  if (sweep.empty()) {
    const auto plain = LoadDenoiser(models_dir, "plain", m.dataset_hash);
    const auto du = LoadDenoiser(models_dir, "du", m.dataset_hash);
    const auto results = eval::CompareSchemes(EvalConditions(ds, {Role::kTrain, Role::kValidation}),
                                              EvalConditions(ds, {Role::kTest}), m.pod, m.kriging,
                                              {{"raw", nullptr}, {"plain", &plain}, {"du", &du}});
    const std::string table = SchemeTable(results);
    WriteText(out_dir / "schemes.tsv", table);
    WriteText(out_dir / "conditions.tsv", ConditionTable(results));
    Log(log, table);
    return;
  }

  eval::SweepInputs in;
  in.pod = &m.pod;
  in.kriging = &m.kriging;
  auto fill = [&](eval::SweepInputs& s, const Dataset& d) {
    s.train = d.Samples(Role::kTrain);
    s.validation = d.Samples(Role::kValidation);
    s.calibration = EvalConditions(d, {Role::kTrain, Role::kValidation});
    s.test = EvalConditions(d, {Role::kTest});
  };

  if (sweep == "rf") {
    fill(in, ds);
    in.train_config = SchemeTrainConfig(config, "du", config.du.alpha);
    std::vector<dnn::NetworkConfig> cfgs;
    for (const auto& d : config.eval.rf_configs) cfgs.push_back(d.Network(config.grid.n_pixels));
    Log(log, "receptive-field sweep over " + std::to_string(cfgs.size()) + " architectures");
    const auto rows = eval::RfSweep(cfgs, in);
    std::string t =
        "receptive_field\tempirical_receptive_field\tparam_count\tn_layers\tn_channels\t"
        "kernel_size\tdownsample\tP_REP\tP_RSD\tphi_REP\tphi_RSD\n";
    for (const auto& r : rows) {
      t += std::to_string(r.receptive_field) + "\t" + std::to_string(r.empirical_receptive_field) +
           "\t" + std::to_string(r.param_count) + "\t" + std::to_string(r.config.n_layers) + "\t" +
           std::to_string(r.config.n_channels) + "\t" + std::to_string(r.config.kernel_size) +
           "\t" + std::to_string(r.config.downsample) + "\t" + Num(r.pressure.relative_error) +
           "\t" + Num(r.pressure.rsd) + "\t" + Num(r.phi.relative_error) + "\t" + Num(r.phi.rsd) +
           "\n";
    }
    WriteText(out_dir / "rf_sweep.tsv", t);
    Log(log, t);
    return;
  }

  if (sweep == "exposure") {
    eval::ExposureSweepHooks hooks;
    hooks.regenerate = [&](double tau) {
      Config c = config;
      c.acquisition.tau_ls = tau;
      const Dataset d = Dataset::Build(c);
      eval::SweepInputs s;
      fill(s, d);
      s.pod = &m.pod;
      s.kriging = &m.kriging;
      s.train_config = SchemeTrainConfig(config, "du", config.du.alpha);
      return s;
    };
    hooks.snr = [&](double tau) { return OhPixelSnr(config, tau); };
    hooks.networks = {{"plain", config.plain.Network(config.grid.n_pixels), config.plain.alpha},
                      {"du", config.du.Network(config.grid.n_pixels), config.du.alpha}};
    std::optional<dnn::DenoiserNet> plain, du;
    if (!config.eval.retrain) {
      plain = LoadDenoiser(models_dir, "plain", m.dataset_hash);
      du = LoadDenoiser(models_dir, "du", m.dataset_hash);
      hooks.reuse = {&*plain, &*du};
    }
    Log(log, std::string("exposure sweep over ") + std::to_string(config.eval.exposures.size()) +
                 " exposures (" + (config.eval.retrain ? "retraining" : "reusing") + " denoisers)");
    const auto rows = eval::ExposureSweep(config.eval.exposures, hooks);
    std::string t = "exposure_s\tsnr\tscheme\tP_accuracy\tphi_accuracy\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.schemes.size(); ++i) {
        t += Fmt("%.4f", r.exposure_s) + "\t" + Fmt("%.4f", r.snr) + "\t" + r.schemes[i] + "\t" +
             Num(r.pressure_accuracy[i]) + "\t" + Num(r.phi_accuracy[i]) + "\n";
      }
    }
    WriteText(out_dir / "exposure_sweep.tsv", t);
    Log(log, t);
    return;
  }
  throw Error(ErrorCode::kUsage, "--sweep must be rf or exposure");
}

namespace {

std::vector<std::vector<std::string>> ReadTable(const fs::path& path) {
  std::istringstream in(ReadText(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, '\t')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string Markdown(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "";
  std::string md = "|";
  for (const auto& h : rows[0]) md += " " + h + " |";
  md += "\n|";
  for (std::size_t i = 0; i < rows[0].size(); ++i) md += " --- |";
  md += "\n";
  for (std::size_t r = 1; r < rows.size(); ++r) {
    md += "|";
    for (const auto& c : rows[r]) md += " " + c + " |";
    md += "\n";
  }
  return md;
}

}  // namespace

void CmdReport(const fs::path& out_dir, const Logger& log) {
  DirectoryLock lock(out_dir);
  std::string doc = "# flamespec evaluation summary\n\n";
  bool any = false;
  const fs::path schemes = out_dir / "schemes.tsv";
  if (fs::exists(schemes)) {
    any = true;
    const auto rows = ReadTable(schemes);
    doc += "## Scheme comparison\n\nRelative errors and RSD in percent. REC uses the calibration "
           "conditions, REP and RSD the held-out test conditions.\n\n" + Markdown(rows) + "\n";
    std::map<std::string, std::vector<std::string>> by;
    for (std::size_t r = 1; r < rows.size(); ++r) by[rows[r][0]] = rows[r];
    if (by.count("raw") && by.count("du")) {
      const double p_raw = std::stod(by["raw"][2]), p_du = std::stod(by["du"][2]);
      const double f_raw = std::stod(by["raw"][5]), f_du = std::stod(by["du"][5]);
      doc += "- P REP, raw / du: " + Fmt("%.3f", p_raw) + " / " + Fmt("%.3f", p_du) + "\n";
      doc += "- phi REP, raw / du: " + Fmt("%.3f", f_raw) + " / " + Fmt("%.3f", f_du) +
             " (improvement factor " + Fmt("%.3f", f_du > 0 ? f_raw / f_du : 0.0) + ")\n\n";
    }
  }
  for (const auto& [file, title] :
       std::vector<std::pair<std::string, std::string>>{
           {"rf_sweep.tsv", "Receptive-field sweep"}, {"exposure_sweep.tsv", "Exposure sweep"}}) {
    if (fs::exists(out_dir / file)) {
      any = true;
      doc += "## " + title + "\n\n" + Markdown(ReadTable(out_dir / file)) + "\n";
    }
  }
  if (!any) {
    throw Error(ErrorCode::kEmptyInput, "no result tables in " + out_dir.string() + "; run eval first");
  }
  WriteText(out_dir / "summary.md", doc);
  Log(log, "wrote " + (out_dir / "summary.md").string());
}

}  // namespace flamespec
