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

#include "flamespec/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <span>
#include <sstream>

#include "flamespec/error.hpp"
#include "flamespec/hash.hpp"
#include "flamespec/synthgen.hpp"
#include "json.hpp"

namespace flamespec {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "blob I/O assumes a little-endian host");

// Stream tags for StreamSeed.
constexpr std::uint64_t kLowSnrStream = 1;
constexpr std::uint64_t kHighSnrStream = 2;
constexpr std::uint64_t kDarkStream = 3;
constexpr std::uint64_t kDesignStream = 4;

[[noreturn]] void BadFormat(const std::string& what) {
  throw Error(ErrorCode::kFormat, "dataset: " + what);
}

Role RoleFromName(std::string_view name) {
  if (name == "train") return Role::kTrain;
  if (name == "validation") return Role::kValidation;
  if (name == "test") return Role::kTest;
  BadFormat("unknown role '" + std::string(name) + "'");
}

SnrClass SnrFromName(std::string_view name) {
  if (name == "low") return SnrClass::kLow;
  if (name == "high") return SnrClass::kHigh;
  BadFormat("unknown snr class '" + std::string(name) + "'");
}

template <class T>
T Field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) BadFormat(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    BadFormat(std::string("field '") + key + "' has the wrong type");
  }
}

json ManifestJson(const DatasetManifest& m) {
  json records = json::array();
  for (const auto& r : m.records) {
    records.push_back({{"condition_index", r.condition_index},
                       {"pressure_bar", r.condition.pressure_bar},
                       {"equivalence_ratio", r.condition.equivalence_ratio},
                       {"role", RoleName(r.role)},
                       {"snr", SnrClassName(r.snr)},
                       {"exposure_s", r.exposure_s},
                       {"stage", StageName(r.stage)},
                       {"offset", r.offset},
                       {"length", r.length},
                       {"seed", r.seed}});
  }
  json darks = json::array();
  for (const auto& d : m.darks) {
    darks.push_back({{"exposure_s", d.exposure_s},
                     {"n_frames", d.n_frames},
                     {"offset", d.offset},
                     {"length", d.length},
                     {"seed", d.seed}});
  }
  return {{"format_version", m.format_version},
          {"grid", {{"start_nm", m.grid.start_nm}, {"end_nm", m.grid.end_nm}, {"n_pixels", m.grid.n_pixels}}},
          {"generator_hash", m.generator_hash},
          {"records", records},
          {"darks", darks}};
}

DatasetManifest ManifestFromJson(const json& j) {
  DatasetManifest m;
  m.format_version = Field<int>(j, "format_version");
  if (m.format_version != DatasetManifest::kFormatVersion) {
    BadFormat("unsupported format_version " + std::to_string(m.format_version));
  }
  const json& g = j.at("grid");
  m.grid = {Field<double>(g, "start_nm"), Field<double>(g, "end_nm"), Field<std::size_t>(g, "n_pixels")};
  m.generator_hash = Field<std::string>(j, "generator_hash");
  for (const auto& r : j.at("records")) {
    DatasetRecord rec;
    rec.condition_index = Field<std::size_t>(r, "condition_index");
    rec.condition = {Field<double>(r, "pressure_bar"), Field<double>(r, "equivalence_ratio")};
    rec.role = RoleFromName(Field<std::string>(r, "role"));
    rec.snr = SnrFromName(Field<std::string>(r, "snr"));
    rec.exposure_s = Field<double>(r, "exposure_s");
    try {
      rec.stage = StageFromName(Field<std::string>(r, "stage"));
    } catch (const Error&) {
      BadFormat("unknown stage");
    }
    rec.offset = Field<std::uint64_t>(r, "offset");
    rec.length = Field<std::uint64_t>(r, "length");
    rec.seed = Field<std::uint64_t>(r, "seed");
    m.records.push_back(rec);
  }
  for (const auto& d : j.at("darks")) {
    m.darks.push_back({Field<double>(d, "exposure_s"), Field<std::size_t>(d, "n_frames"),
                       Field<std::uint64_t>(d, "offset"), Field<std::uint64_t>(d, "length"),
                       Field<std::uint64_t>(d, "seed")});
  }
  return m;
}

// Mean of n dark frames at exposure tau.
Spectrum AverageDark(const WavelengthGrid& grid, double tau, std::size_t n, const CcdConfig& ccd,
                     std::uint64_t seed) {
  const std::vector<double> zero(grid.n_pixels(), 0.0);
  std::vector<double> acc(grid.n_pixels(), 0.0);
  for (std::size_t f = 0; f < n; ++f) {
    const Spectrum d = Acquire(grid, zero, tau, ccd, StreamSeed(seed, f));
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
  }
  for (double& v : acc) v /= double(n);
  return Spectrum(grid, std::move(acc), tau, Stage::kRawCounts);
}

}  // namespace

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kTrain: return "train";
    case Role::kValidation: return "validation";
    case Role::kTest: return "test";
  }
  return "?";
}

std::string_view SnrClassName(SnrClass snr) { return snr == SnrClass::kLow ? "low" : "high"; }

void DatasetManifest::Validate(std::uint64_t blob_bytes) const {
  const std::uint64_t expect = 4ULL * grid.n_pixels;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
  std::map<std::size_t, Role> roles;
  for (const auto& r : records) {
    if (r.length != expect) BadFormat("record length differs from 4 * n_pixels");
    spans.emplace_back(r.offset, r.length);
    auto [it, fresh] = roles.emplace(r.condition_index, r.role);
    if (!fresh && it->second != r.role) {
      BadFormat("condition " + std::to_string(r.condition_index) + " appears under two roles");
    }
  }
  for (const auto& d : darks) {
    if (d.length != expect) BadFormat("dark length differs from 4 * n_pixels");
    spans.emplace_back(d.offset, d.length);
  }
  std::sort(spans.begin(), spans.end());
  std::uint64_t end = 0;
  for (const auto& [off, len] : spans) {
    if (off < end) BadFormat("blob ranges overlap");
    end = off + len;
  }
  if (end > blob_bytes) BadFormat("blob is shorter than the manifest requires");
}

Dataset Dataset::Build(const Config& config) {
  config.Validate();
  const WavelengthGrid grid = config.grid.Make();
  const EmitterModel model = config.Emitter();
  const auto& acq = config.acquisition;
  const std::size_t w = grid.n_pixels();

  SamplingPlan train_plan;
  train_plan.kind = PlanKind::kFullFactorial;
  train_plan.n_pressure = config.design.train_pressure_levels;
  train_plan.n_phi = config.design.train_phi_levels;
  train_plan.pressure_lo = config.design.pressure_lo;
  train_plan.pressure_hi = config.design.pressure_hi;
  train_plan.phi_lo = config.design.phi_lo;
  train_plan.phi_hi = config.design.phi_hi;
  SamplingPlan test_plan = train_plan;
  test_plan.kind = PlanKind::kLatinHypercube;
  test_plan.n_samples = config.design.test_samples;
  test_plan.seed = StreamSeed(config.seed, kDesignStream, 1);

  const auto train_conditions = FullFactorial(train_plan);
  const auto test_conditions = LatinHypercube(test_plan);
  const auto validation = dnn::ValidationConditions(
      train_conditions.size(), config.design.validation_fraction,
      StreamSeed(config.seed, kDesignStream, 2));

  struct Planned {
    GasCondition condition;
    Role role;
  };
  std::vector<Planned> plan;
  for (std::size_t i = 0; i < train_conditions.size(); ++i) {
    const bool held = std::binary_search(validation.begin(), validation.end(), i);
    plan.push_back({train_conditions[i], held ? Role::kValidation : Role::kTrain});
  }
  for (const auto& c : test_conditions) plan.push_back({c, Role::kTest});

  Dataset ds;
  ds.manifest_.grid = config.grid;
  ds.manifest_.generator_hash = GeneratorHash(config);
  auto append = [&](std::span<const double> values) {
    const std::uint64_t offset = ds.blob_.size() * sizeof(float);
    for (double v : values) ds.blob_.push_back(float(v));
    return offset;
  };

  // One shared mean dark per exposure, reused by every condition.
  std::map<double, Spectrum> mean_dark;
  for (double tau : {acq.tau_ls, acq.tau_hs}) {
    const std::uint64_t seed = StreamSeed(config.seed, kDarkStream, std::bit_cast<std::uint64_t>(tau));
    Spectrum dark = AverageDark(grid, tau, acq.n_dark, config.ccd, seed);
    const std::uint64_t offset = append(dark.intensities());
    ds.manifest_.darks.push_back({tau, acq.n_dark, offset, 4ULL * w, seed});
    mean_dark.emplace(tau, std::move(dark));
  }

  for (std::size_t ci = 0; ci < plan.size(); ++ci) {
    const auto rate = CleanSpectrum(plan[ci].condition, grid, model);
    auto emit = [&](SnrClass snr, double tau, std::uint64_t stream, std::size_t count) {
      for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t seed = StreamSeed(config.seed, stream, ci, k);
        const Spectrum s = Preprocess(Acquire(grid, rate, tau, config.ccd, seed), mean_dark.at(tau));
        DatasetRecord rec;
        rec.condition_index = ci;
        rec.condition = plan[ci].condition;
        rec.role = plan[ci].role;
        rec.snr = snr;
        rec.exposure_s = tau;
        rec.stage = s.stage();
        rec.offset = append(s.intensities());
        rec.length = 4ULL * w;
        rec.seed = seed;
        ds.manifest_.records.push_back(rec);
      }
    };
    emit(SnrClass::kLow, acq.tau_ls, kLowSnrStream, acq.n_ls);
    emit(SnrClass::kHigh, acq.tau_hs, kHighSnrStream, acq.n_hs);
  }
  ds.manifest_.Validate(ds.BlobBytes());
  return ds;
}

std::string Dataset::ManifestText() const { return ManifestJson(manifest_).dump(2) + "\n"; }

void Dataset::Save(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / kManifestFile, std::ios::binary | std::ios::trunc);
    out << ManifestText();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / kManifestFile).string());
  }
  std::ofstream out(dir / kBlobFile, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(blob_.data()), std::streamsize(BlobBytes()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / kBlobFile).string());
}

Dataset Dataset::Load(const std::filesystem::path& dir) {
  std::ifstream min(dir / kManifestFile, std::ios::binary);
  if (!min) throw Error(ErrorCode::kIo, "cannot read " + (dir / kManifestFile).string());
  std::ostringstream text;
  text << min.rdbuf();
  Dataset ds;
  try {
    ds.manifest_ = ManifestFromJson(json::parse(text.str()));
  } catch (const json::exception& e) {
    BadFormat(std::string("manifest is malformed: ") + e.what());
  }
  std::ifstream bin(dir / kBlobFile, std::ios::binary | std::ios::ate);
  if (!bin) throw Error(ErrorCode::kIo, "cannot read " + (dir / kBlobFile).string());
  const auto bytes = std::uint64_t(bin.tellg());
  if (bytes % sizeof(float) != 0) BadFormat("blob size is not a multiple of 4");
  ds.blob_.resize(bytes / sizeof(float));
  bin.seekg(0);
  bin.read(reinterpret_cast<char*>(ds.blob_.data()), std::streamsize(bytes));
  if (!bin) throw Error(ErrorCode::kIo, "short read on " + (dir / kBlobFile).string());
  try {
    ds.manifest_.grid.Make();
  } catch (const Error&) {
    BadFormat("grid descriptor is invalid");
  }
  ds.manifest_.Validate(bytes);
  return ds;
}

std::vector<double> Dataset::Slice(std::uint64_t offset, std::uint64_t length) const {
  const float* p = blob_.data() + offset / sizeof(float);
  return std::vector<double>(p, p + length / sizeof(float));
}

std::vector<double> Dataset::Values(const DatasetRecord& record) const {
  return Slice(record.offset, record.length);
}

Spectrum Dataset::MeanDark(double exposure_s) const {
  for (const auto& d : manifest_.darks) {
    if (d.exposure_s == exposure_s) {
      return Spectrum(grid(), Slice(d.offset, d.length), exposure_s, Stage::kRawCounts);
    }
  }
  throw Error(ErrorCode::kExposureMismatch,
              "dataset has no mean dark at exposure " + std::to_string(exposure_s) + " s");
}

std::vector<dnn::ConditionSamples> Dataset::Samples(Role role) const {
  std::vector<dnn::ConditionSamples> out;
  std::map<std::size_t, std::size_t> slot;
  for (const auto& r : manifest_.records) {
    if (r.role != role) continue;
    auto [it, fresh] = slot.emplace(r.condition_index, out.size());
    if (fresh) out.push_back({r.condition, {}, {}});
    auto& cs = out[it->second];
    (r.snr == SnrClass::kLow ? cs.low_snr : cs.high_snr).push_back(Values(r));
  }
  return out;
}

std::size_t Dataset::ConditionCount() const {
  std::map<std::size_t, int> seen;
  for (const auto& r : manifest_.records) seen[r.condition_index] = 1;
  return seen.size();
}

namespace {

std::size_t CountPairs(const DatasetManifest& manifest, bool training_only) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& r : manifest.records) {
    if (training_only && r.role == Role::kTest) continue;
    auto& c = counts[r.condition_index];
    (r.snr == SnrClass::kLow ? c.first : c.second)++;
  }
  std::size_t total = 0;
  for (const auto& [_, c] : counts) total += c.first * c.second;
  return total;
}

}  // namespace

std::size_t Dataset::PairCount() const { return CountPairs(manifest_, false); }
std::size_t Dataset::TrainingPairCount() const { return CountPairs(manifest_, true); }

std::string Dataset::Hash() const {
  Fnv1a h;
  h.Update(ManifestText());
  h.Update(blob_.data(), BlobBytes());
  return h.hex();
}

}  // namespace flamespec
