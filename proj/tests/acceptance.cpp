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

// Acceptance runner: one PASS/FAIL line per criterion. With no arguments
// every criterion runs; `--only N` (repeatable) selects a subset. Exit code
// is nonzero when any selected criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flamespec/config.hpp"
#include "flamespec/dataset.hpp"
#include "flamespec/dnn.hpp"
#include "flamespec/kriging.hpp"
#include "flamespec/pipeline.hpp"
#include "flamespec/pod.hpp"
#include "flamespec/synthgen.hpp"
#include "oracles.hpp"

using namespace flamespec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

fs::path Scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("flamespec_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const Logger kQuiet = [](std::string_view) {};

// --- 1 -------------------------------------------------------------------
Outcome ReceptiveFieldProbe() {
  std::mt19937_64 rng(2024);
  std::string mismatches;
  for (int t = 0; t < 10; ++t) {
    const dnn::NetworkConfig c{2 + rng() % 4, 2, 1 + 2 * (rng() % 4), 1 + rng() % 8, 16 + rng() % 49};
    const std::size_t want = std::min(dnn::ReceptiveField(c), c.padded_width());
    const std::size_t got = dnn::EmpiricalReceptiveField(dnn::ProbeNet(c, 100 + t));
    if (got != want) {
      mismatches += " (" + std::to_string(c.n_layers) + "," + std::to_string(c.kernel_size) + "," +
                    std::to_string(c.downsample) + ",W=" + std::to_string(c.input_width) +
                    "): " + std::to_string(got) + " vs " + std::to_string(want);
    }
  }
  if (!mismatches.empty()) return {false, "probe differs from formula:" + mismatches};
  return {true, "probe equals N_d(N_l(N_k-1)+1) clipped at padded W on 10 random configs"};
}

// --- 2 -------------------------------------------------------------------
Outcome ParameterCount() {
  std::vector<dnn::NetworkConfig> configs{{7, 32, 15, 16, 1696}};
  std::mt19937_64 rng(77);
  while (configs.size() < 20) {
    configs.push_back({2 + rng() % 7, 1 + rng() % 16, 1 + 2 * (rng() % 8), 1 + rng() % 16, 64});
  }
  for (const auto& c : configs) {
    const std::size_t enumerated = oracle::EnumerateConvParams(dnn::DenoiserNet(c, 1));
    if (dnn::ParamCount(c) != enumerated) {
      return {false, "formula " + std::to_string(dnn::ParamCount(c)) + " vs enumerated " +
                         std::to_string(enumerated)};
    }
  }
  const std::size_t baseline = dnn::ParamCount(configs[0]);
  return {baseline == 92368, "20 configs match enumeration; baseline (7,32,15,16) = " +
                                 std::to_string(baseline)};
}

// --- 3 -------------------------------------------------------------------
Outcome NoiseTable() {
  const WavelengthGrid grid = WavelengthGrid::Default();
  const CcdConfig ccd;
  const auto rate = CleanSpectrum({10.0, 1.0}, grid, EmitterModel::Default());
  const std::size_t pixel = grid.nearest_pixel(308.0);
  const std::vector<double> zero(grid.n_pixels(), 0.0);
  const double taus[] = {0.05, 0.2, 0.4};
  const double targets[] = {4.3, 14.0, 22.0};
  bool pass = true;
  std::string detail = "SNR at 308 nm over 1000 acquisitions:";
  for (int i = 0; i < 3; ++i) {
    std::vector<double> dark(grid.n_pixels(), 0.0);
    for (int k = 0; k < 1000; ++k) {
      const Spectrum d = Acquire(grid, zero, taus[i], ccd, StreamSeed(31, 1, std::uint64_t(i), std::uint64_t(k)));
      for (std::size_t j = 0; j < dark.size(); ++j) dark[j] += d[j] / 1000.0;
    }
    const Spectrum mean_dark(grid, dark, taus[i], Stage::kRawCounts);
    std::vector<Spectrum> raw;
    for (int k = 0; k < 1000; ++k) {
      raw.push_back(Acquire(grid, rate, taus[i], ccd, StreamSeed(31, 2, std::uint64_t(i), std::uint64_t(k))));
    }
    const double snr = eval::EmpiricalSnr(raw, pixel, mean_dark);
    const bool ok = std::abs(snr - targets[i]) <= 0.1 * targets[i];
    pass = pass && ok;
    detail += " tau=" + Fmt("%.2f", taus[i]) + " -> " + Fmt("%.2f", snr) + " (target " +
              Fmt("%.1f", targets[i]) + (ok ? ")" : ", out of band)");
  }
  return {pass, detail};
}

// --- 4 -------------------------------------------------------------------
Outcome GradientCheck() {
  const std::size_t w = 16;
  const dnn::NetworkConfig cfg{3, 4, 3, 2, w};
  const dnn::DenoiserNet net(cfg, 5);
  const std::size_t params = dnn::ParamCount(cfg) + dnn::BatchNormParamCount(cfg);
  Eigen::MatrixXd snaps(8, Eigen::Index(w));
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  for (Eigen::Index i = 0; i < snaps.rows(); ++i)
    for (Eigen::Index j = 0; j < snaps.cols(); ++j)
      snaps(i, j) = 1.0 + 0.5 * std::sin(0.4 * double(j) * double(i + 1)) + 0.05 * n01(rng);
  const PodModel pod = PodModel::Fit(snaps, 5);
  std::vector<double> x(3 * w), y(3 * w);
  for (auto& v : x) v = 1.0 + n01(rng);
  for (auto& v : y) v = 1.0 + n01(rng);
  const double e0 = oracle::GradCheck(net, x, y, 3, pod, 0.0);
  const double e1 = oracle::GradCheck(net, x, y, 3, pod, 0.1);
  return {params < 1000 && e0 < 1e-4 && e1 < 1e-4,
          "worst relative error " + Fmt("%.2e", e0) + " (alpha 0), " + Fmt("%.2e", e1) +
              " (alpha 0.1) over " + std::to_string(params) + " parameters"};
}

// --- 5 -------------------------------------------------------------------
Outcome DuReversibility() {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  for (std::size_t w : {7u, 8u, 1696u}) {
    for (std::size_t nd : {1u, 2u, 3u, 16u}) {
      std::vector<double> x(w);
      for (auto& v : x) v = n01(rng);
      if (dnn::Upsample(dnn::Downsample(x, nd), nd, w) != x) {
        return {false, "round trip differs at W=" + std::to_string(w) + ", N_d=" + std::to_string(nd)};
      }
    }
  }
  return {true, "up(down(x)) == x bit-exactly for W in {7, 8, 1696} x N_d in {1, 2, 3, 16}"};
}

// --- 6 -------------------------------------------------------------------
Outcome PodOracle() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd x(6, 8);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
    const std::size_t k = 5;
    const PodModel pod = PodModel::Fit(x, k);
    std::vector<std::vector<double>> gram(6, std::vector<double>(6));
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) gram[i][j] = x.row(i).dot(x.row(j));
    const auto [vals, vecs] = oracle::Jacobi(gram);
    std::vector<Eigen::VectorXd> ref;
    for (std::size_t j = 0; j < k; ++j) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
      for (int i = 0; i < 6; ++i) v += vecs[j][i] * x.row(i).transpose();
      v /= std::sqrt(vals[j]);
      const Eigen::VectorXd b = pod.bases().row(Eigen::Index(j)).transpose();
      const double sign = b.dot(v) >= 0 ? 1.0 : -1.0;
      worst = std::max(worst, (b - sign * v).cwiseAbs().maxCoeff());
      ref.push_back(v);
    }
    for (int i = 0; i < 6; ++i) {
      const Eigen::VectorXd s = x.row(i).transpose();
      const Eigen::VectorXd rec = pod.Reconstruct(pod.Project({s.data(), 8}));
      Eigen::VectorXd want = Eigen::VectorXd::Zero(8);
      for (const auto& v : ref) want += v.dot(s) * v;
      worst = std::max(worst, (rec - want).cwiseAbs().maxCoeff());
    }
  }
  const Config desk = Config::DeskScale();
  const Dataset ds = Dataset::Build(desk);
  const Calibration cal = FitCalibration(desk, ds);
  const double energy = cal.pod.cumulative_energy();
  return {worst < 1e-6 && energy >= 0.997,
          "oracle deviation " + Fmt("%.1e", worst) + " on 10 random 6x8 matrices; k=5 energy on the desk "
          "high-SNR training set " + Fmt("%.4f", 100.0 * energy) + "%"};
}

// --- 7 -------------------------------------------------------------------
Outcome KrigingChecks() {
  double site_err = 0.0, oracle_err = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u;
    Eigen::MatrixXd sites(25, 5), targets(25, 2);
    for (Eigen::Index i = 0; i < 25; ++i) {
      for (Eigen::Index d = 0; d < 5; ++d) sites(i, d) = u(rng);
      targets(i, 0) = 1.0 + 9.0 * sites(i, 0) * sites(i, 1);
      targets(i, 1) = 0.8 + 0.4 * sites(i, 2);
    }
    const KrigingModel m = KrigingModel::Fit(sites, targets);
    for (Eigen::Index i = 0; i < 25; ++i) {
      const auto p = m.Predict(sites.row(i).transpose());
      for (Eigen::Index o = 0; o < 2; ++o)
        site_err = std::max(site_err, std::abs(p.mean(o) - targets(i, o)) / std::abs(targets(i, o)));
    }
  }
  for (Eigen::Index n = 2; n <= 8; ++n) {
    std::mt19937_64 rng(std::uint64_t(50 + n));
    std::uniform_real_distribution<double> u;
    Eigen::MatrixXd sites(n, 3), targets(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index d = 0; d < 3; ++d) sites(i, d) = u(rng);
      targets(i, 0) = 2.0 + std::sin(3.0 * sites(i, 0));
      targets(i, 1) = 0.8 + 0.4 * sites(i, 2) * sites(i, 0);
    }
    const KrigingModel m = KrigingModel::Fit(sites, targets);
    for (int q = 0; q < 5; ++q) {
      Eigen::VectorXd x(3);
      for (Eigen::Index d = 0; d < 3; ++d) x(d) = u(rng);
      const auto p = m.Predict(x);
      for (Eigen::Index o = 0; o < 2; ++o) {
        const auto [mean, var] = oracle::DenseKriging(sites, targets.col(o), m.theta().col(o),
                                                      m.effective_nugget()(o), x);
        oracle_err = std::max(oracle_err, std::abs(p.mean(o) - mean) / std::max(1.0, std::abs(mean)));
      }
    }
  }
  return {site_err < 1e-6 && oracle_err < 1e-8,
          "worst relative site error " + Fmt("%.1e", site_err) + "; dense-solve deviation " +
              Fmt("%.1e", oracle_err) + " for n = 2..8"};
}

// --- 8 / 10 --------------------------------------------------------------
void RunPipeline(const Config& config, const fs::path& root) {
  CmdGen(config, root / "data", kQuiet);
  CmdCalibrate(config, root / "data", root / "models", kQuiet);
  CmdTrain(config, root / "data", root / "models", "du", kQuiet);
  CmdTrain(config, root / "data", root / "models", "plain", kQuiet);
  CmdEval(config, root / "data", root / "models", root / "results", "", kQuiet);
}

std::map<std::string, std::vector<double>> ReadSchemes(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  std::map<std::string, std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string scheme;
    ls >> scheme;
    std::vector<double> v;
    for (double x; ls >> x;) v.push_back(x);
    rows[scheme] = v;
  }
  return rows;
}

Outcome DeskEndToEnd() {
  const Config desk = Config::DeskScale();
  const fs::path root = Scratch("desk");
  RunPipeline(desk, root);
  auto rows = ReadSchemes(root / "results" / "schemes.tsv");
  // Columns: P_REC P_REP P_RSD phi_REC phi_REP phi_RSD.
  const double raw_p = rows["raw"].at(1), raw_phi = rows["raw"].at(4);
  const double du_p = rows["du"].at(1), du_phi = rows["du"].at(4);
  const double factor = raw_phi / du_phi;
  const bool pass = du_p < raw_p && du_phi < raw_phi && factor >= 1.5;
  return {pass, "REP raw vs du: P " + Fmt("%.2f", raw_p) + "% vs " + Fmt("%.2f", du_p) + "%, phi " +
                    Fmt("%.2f", raw_phi) + "% vs " + Fmt("%.2f", du_phi) + "% (phi factor " +
                    Fmt("%.2f", factor) + ", need >= 1.5 and du below raw on both)"};
}

// --- 9 -------------------------------------------------------------------
Outcome Scheduler() {
  const dnn::SchedulerConfig c;  // {50, 1, 0.005, 10, 0.1}
  const double a = dnn::LrSchedule(0, c), b = dnn::LrSchedule(10, c), peak = dnn::LrSchedule(60, c);
  const bool pass = a == 0.0 && std::abs(b - 0.005) < 1e-15 && std::abs(peak - 0.0005) < 1e-15;
  return {pass, "lr(0) = " + Fmt("%g", a) + ", lr(10) = " + Fmt("%g", b) + ", cycle-1 peak lr(60) = " +
                    Fmt("%g", peak)};
}

// --- 10 ------------------------------------------------------------------
std::map<std::string, std::string> Snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), root).string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

Outcome Determinism() {
  const Config desk = Config::DeskScale();
  const fs::path a = Scratch("rerun_a"), b = Scratch("rerun_b");
  RunPipeline(desk, a);
  RunPipeline(desk, b);
  const auto fa = Snapshot(a), fb = Snapshot(b);
  if (fa.size() != fb.size()) return {false, "runs wrote different file sets"};
  std::size_t bytes = 0;
  for (const auto& [name, content] : fa) {
    const auto it = fb.find(name);
    if (it == fb.end() || it->second != content) return {false, name + " differs between runs"};
    bytes += content.size();
  }
  return {true, std::to_string(fa.size()) + " artifacts (" + std::to_string(bytes) +
                    " bytes) from gen/calibrate/train/eval identical across two runs"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, ReceptiveFieldProbe}, {2, ParameterCount}, {3, NoiseTable},  {4, GradientCheck},
      {5, DuReversibility},     {6, PodOracle},      {7, KrigingChecks}, {8, DeskEndToEnd},
      {9, Scheduler},           {10, Determinism}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--only N]...\n", argv[0]);
      return 2;
    }
  }
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
