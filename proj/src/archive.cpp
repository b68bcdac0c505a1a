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

#include "flamespec/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "flamespec/error.hpp"
#include "json.hpp"

namespace flamespec {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "archive I/O assumes a little-endian host");

constexpr char kMagic[8] = {'F', 'S', 'A', 'R', 'C', 'H', 'V', '1'};

[[noreturn]] void BadFormat(const std::string& what) {
  throw Error(ErrorCode::kFormat, "archive: " + what);
}

std::uint64_t Count(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::vector<double> FromMatrix(const Eigen::MatrixXd& m) {
  // Row-major flattening.
  std::vector<double> out;
  out.reserve(std::size_t(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Eigen::MatrixXd ToMatrix(const ArchiveArray& a) {
  if (a.shape.size() != 2) BadFormat("array '" + a.name + "' is not two-dimensional");
  Eigen::MatrixXd m(Eigen::Index(a.shape[0]), Eigen::Index(a.shape[1]));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = a.data[k++];
  }
  return m;
}

Eigen::VectorXd ToVector(const ArchiveArray& a) {
  return Eigen::Map<const Eigen::VectorXd>(a.data.data(), Eigen::Index(a.data.size()));
}

std::vector<double> FromVector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json ParseConfigDoc(const ModelArchive& a) {
  try {
    return json::parse(a.config_json());
  } catch (const json::exception&) {
    BadFormat("config document is not valid JSON");
  }
}

template <class T>
T ConfigField(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) BadFormat(std::string("config lacks '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    BadFormat(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

void ModelArchive::Add(std::string name, std::vector<std::uint64_t> shape,
                       std::vector<double> data) {
  if (Count(shape) != data.size()) BadFormat("array '" + name + "' shape does not match its data");
  arrays_.push_back({std::move(name), std::move(shape), std::move(data)});
}

const ArchiveArray& ModelArchive::Get(std::string_view name, std::size_t expected_count) const {
  for (const auto& a : arrays_) {
    if (a.name == name) {
      if (a.data.size() != expected_count) {
        BadFormat("array '" + a.name + "' has " + std::to_string(a.data.size()) +
                  " elements, expected " + std::to_string(expected_count));
      }
      return a;
    }
  }
  BadFormat("missing array '" + std::string(name) + "'");
}

std::vector<unsigned char> ModelArchive::Serialize() const {
  json table = json::array();
  std::uint64_t offset = 0;
  for (const auto& a : arrays_) {
    table.push_back({{"name", a.name}, {"shape", a.shape}, {"dtype", "f64"}, {"offset", offset}});
    offset += a.data.size() * sizeof(double);
  }
  json header = {{"kind", kind_},
                 {"config", json::parse(config_json_)},
                 {"provenance",
                  {{"dataset_hash", provenance_.dataset_hash},
                   {"seed", provenance_.seed},
                   {"tool_version", provenance_.tool_version}}},
                 {"arrays", table}};
  std::string text = header.dump();
  text.append((8 - text.size() % 8) % 8, ' ');

  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  const std::uint64_t len = text.size();
  const auto* lp = reinterpret_cast<const unsigned char*>(&len);
  out.insert(out.end(), lp, lp + sizeof len);
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& a : arrays_) {
    const auto* p = reinterpret_cast<const unsigned char*>(a.data.data());
    out.insert(out.end(), p, p + a.data.size() * sizeof(double));
  }
  return out;
}

ModelArchive ModelArchive::Parse(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) BadFormat("bad magic");
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + 8, sizeof len);
  if (len % 8 != 0 || len > bytes.size() - 16) BadFormat("bad header length");
  json header;
  try {
    header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + std::ptrdiff_t(len));
  } catch (const json::exception&) {
    BadFormat("header is not valid JSON");
  }
  ModelArchive a;
  const std::size_t data_start = 16 + len;
  try {
    a.kind_ = header.at("kind").get<std::string>();
    a.config_json_ = header.at("config").dump();
    const auto& p = header.at("provenance");
    a.provenance_ = {p.at("dataset_hash").get<std::string>(), p.at("seed").get<std::uint64_t>(),
                     p.at("tool_version").get<std::string>()};
    std::uint64_t expect_offset = 0;
    for (const auto& e : header.at("arrays")) {
      if (e.at("dtype").get<std::string>() != "f64") BadFormat("unsupported dtype");
      ArchiveArray arr;
      arr.name = e.at("name").get<std::string>();
      arr.shape = e.at("shape").get<std::vector<std::uint64_t>>();
      const auto offset = e.at("offset").get<std::uint64_t>();
      const std::uint64_t n = Count(arr.shape);
      if (offset != expect_offset || data_start + offset + n * 8 > bytes.size()) {
        BadFormat("array '" + arr.name + "' lies outside the data section");
      }
      arr.data.resize(n);
      std::memcpy(arr.data.data(), bytes.data() + data_start + offset, n * sizeof(double));
      expect_offset = offset + n * 8;
      a.arrays_.push_back(std::move(arr));
    }
    if (data_start + expect_offset != bytes.size()) BadFormat("trailing bytes after arrays");
  } catch (const json::exception& e) {
    BadFormat(std::string("malformed header: ") + e.what());
  }
  return a;
}

void ModelArchive::Save(const std::filesystem::path& path) const {
  const auto bytes = Serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

ModelArchive ModelArchive::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Parse(bytes);
}

void ModelArchive::Expect(std::string_view kind, std::string_view dataset_hash) const {
  if (kind_ != kind) {
    throw Error(ErrorCode::kProvenanceMismatch,
                "expected a " + std::string(kind) + " archive, found " + kind_);
  }
  if (provenance_.dataset_hash != dataset_hash) {
    throw Error(ErrorCode::kProvenanceMismatch,
                std::string(kind) + " archive was built from dataset " + provenance_.dataset_hash +
                    ", not " + std::string(dataset_hash) + "; rerun the earlier pipeline steps");
  }
}

ModelArchive PodToArchive(const PodModel& pod, const Provenance& provenance,
                          const WavelengthGrid* grid) {
  json cfg = {{"rank", pod.rank()}, {"width", pod.width()}};
  if (grid) {
    if (grid->n_pixels() != pod.width()) {
      throw Error(ErrorCode::kGridMismatch, "grid size differs from the POD width");
    }
    cfg["grid"] = {{"start_nm", grid->start_nm()},
                   {"end_nm", grid->end_nm()},
                   {"n_pixels", grid->n_pixels()}};
  }
  ModelArchive a(std::string(kPodKind), cfg.dump(), provenance);
  const std::uint64_t k = pod.rank(), w = pod.width();
  a.Add("bases", {k, w}, FromMatrix(pod.bases()));
  a.Add("singular_values", {k}, FromVector(pod.singular_values()));
  a.Add("energy_fraction", {k}, FromVector(pod.energy_fraction()));
  a.Add("coeff_min", {k}, FromVector(pod.coeff_min()));
  a.Add("coeff_max", {k}, FromVector(pod.coeff_max()));
  return a;
}

PodModel PodFromArchive(const ModelArchive& a) {
  if (a.kind() != kPodKind) BadFormat("not a pod archive");
  const json cfg = ParseConfigDoc(a);
  const auto k = ConfigField<std::size_t>(cfg, "rank");
  const auto w = ConfigField<std::size_t>(cfg, "width");
  return PodModel(ToMatrix(a.Get("bases", k * w)), ToVector(a.Get("singular_values", k)),
                  ToVector(a.Get("energy_fraction", k)), ToVector(a.Get("coeff_min", k)),
                  ToVector(a.Get("coeff_max", k)));
}

std::optional<WavelengthGrid> PodGridFromArchive(const ModelArchive& a) {
  if (a.kind() != kPodKind) BadFormat("not a pod archive");
  const json cfg = ParseConfigDoc(a);
  const auto it = cfg.find("grid");
  if (it == cfg.end()) return std::nullopt;
  const auto n = ConfigField<std::size_t>(*it, "n_pixels");
  if (n != ConfigField<std::size_t>(cfg, "width")) BadFormat("recorded grid differs from the POD width");
  try {
    return WavelengthGrid(ConfigField<double>(*it, "start_nm"), ConfigField<double>(*it, "end_nm"), n);
  } catch (const Error& e) {
    BadFormat(std::string("recorded grid is invalid: ") + e.what());
  }
}

ModelArchive KrigingToArchive(const KrigingModel& m, const Provenance& provenance) {
  const json cfg = {{"n_sites", m.n_sites()},
                    {"input_dim", m.input_dim()},
                    {"output_dim", m.output_dim()},
                    {"nugget", m.nugget()}};
  ModelArchive a(std::string(kKrigingKind), cfg.dump(), provenance);
  const std::uint64_t n = m.n_sites(), k = m.input_dim(), o = m.output_dim();
  a.Add("sites", {n, k}, FromMatrix(m.sites()));
  a.Add("targets", {n, o}, FromMatrix(m.targets()));
  a.Add("theta", {k, o}, FromMatrix(m.theta()));
  return a;
}

KrigingModel KrigingFromArchive(const ModelArchive& a) {
  if (a.kind() != kKrigingKind) BadFormat("not a kriging archive");
  const json cfg = ParseConfigDoc(a);
  const auto n = ConfigField<std::size_t>(cfg, "n_sites");
  const auto k = ConfigField<std::size_t>(cfg, "input_dim");
  const auto o = ConfigField<std::size_t>(cfg, "output_dim");
  return KrigingModel::FromParameters(ToMatrix(a.Get("sites", n * k)), ToMatrix(a.Get("targets", n * o)),
                                      ToMatrix(a.Get("theta", k * o)), ConfigField<double>(cfg, "nugget"));
}

ModelArchive DenoiserToArchive(const dnn::DenoiserNet& net, std::string_view scheme, double alpha,
                               const Provenance& provenance) {
  const auto& c = net.config();
  json bn = json::array();
  for (const auto& n : net.norms()) bn.push_back({{"momentum", n.momentum}, {"epsilon", n.epsilon}});
  const json cfg = {{"scheme", scheme},          {"alpha", alpha},
                    {"n_layers", c.n_layers},    {"n_channels", c.n_channels},
                    {"kernel_size", c.kernel_size}, {"downsample", c.downsample},
                    {"input_width", c.input_width}, {"batch_norm", bn}};
  ModelArchive a(std::string(kDenoiserKind), cfg.dump(), provenance);
  for (std::size_t i = 0; i < net.convs().size(); ++i) {
    const auto& l = net.convs()[i];
    const std::string p = "conv" + std::to_string(i);
    a.Add(p + ".weight", {l.c_out, l.c_in, l.kernel}, l.weight);
    a.Add(p + ".bias", {l.c_out}, l.bias);
  }
  for (std::size_t i = 0; i < net.norms().size(); ++i) {
    const auto& n = net.norms()[i];
    const std::string p = "bn" + std::to_string(i);
    a.Add(p + ".gamma", {n.channels}, n.gamma);
    a.Add(p + ".beta", {n.channels}, n.beta);
    a.Add(p + ".running_mean", {n.channels}, n.running_mean);
    a.Add(p + ".running_var", {n.channels}, n.running_var);
  }
  return a;
}

ModelArchive DenoiserToArchive(const dnn::TrainResult& result, std::string_view scheme,
                               double alpha, const Provenance& provenance) {
  ModelArchive base = DenoiserToArchive(result.net, scheme, alpha, provenance);
  json cfg = json::parse(base.config_json());
  cfg["optimizer_step"] = result.optimizer.step;
  ModelArchive a(std::string(kDenoiserKind), cfg.dump(), provenance);
  for (const auto& arr : base.arrays()) a.Add(arr.name, arr.shape, arr.data);
  for (std::size_t i = 0; i < result.optimizer.first_moment.size(); ++i) {
    const auto& m = result.optimizer.first_moment[i];
    const auto& v = result.optimizer.second_moment[i];
    a.Add("adam.m" + std::to_string(i), {m.size()}, m);
    a.Add("adam.v" + std::to_string(i), {v.size()}, v);
  }
  std::vector<double> log;
  for (const auto& e : result.log) {
    log.insert(log.end(), {double(e.epoch), double(e.step), e.lr, e.train_loss, e.validation_loss});
  }
  a.Add("train_log", {result.log.size(), 5}, std::move(log));
  return a;
}

dnn::DenoiserNet DenoiserFromArchive(const ModelArchive& a) {
  if (a.kind() != kDenoiserKind) BadFormat("not a denoiser archive");
  const json cfg = ParseConfigDoc(a);
  const dnn::NetworkConfig nc{ConfigField<std::size_t>(cfg, "n_layers"),
                              ConfigField<std::size_t>(cfg, "n_channels"),
                              ConfigField<std::size_t>(cfg, "kernel_size"),
                              ConfigField<std::size_t>(cfg, "downsample"),
                              ConfigField<std::size_t>(cfg, "input_width")};
  try {
    nc.Validate();
  } catch (const Error& e) {
    BadFormat(std::string("invalid network config: ") + e.what());
  }
  // Shapes come from a freshly built net; values from the archive.
  dnn::DenoiserNet shape(nc, 0);
  std::vector<dnn::ConvLayer> convs = shape.convs();
  std::vector<dnn::BatchNormLayer> norms = shape.norms();
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const std::string p = "conv" + std::to_string(i);
    convs[i].weight = a.Get(p + ".weight", convs[i].weight.size()).data;
    convs[i].bias = a.Get(p + ".bias", convs[i].bias.size()).data;
  }
  const json& bn = cfg.at("batch_norm");
  if (!bn.is_array() || bn.size() != norms.size()) BadFormat("batch_norm list has the wrong length");
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const std::string p = "bn" + std::to_string(i);
    const std::size_t c = norms[i].channels;
    norms[i].gamma = a.Get(p + ".gamma", c).data;
    norms[i].beta = a.Get(p + ".beta", c).data;
    norms[i].running_mean = a.Get(p + ".running_mean", c).data;
    norms[i].running_var = a.Get(p + ".running_var", c).data;
    norms[i].momentum = ConfigField<double>(bn[i], "momentum");
    norms[i].epsilon = ConfigField<double>(bn[i], "epsilon");
  }
  dnn::DenoiserNet net(nc, std::move(convs), std::move(norms));
  net.set_mode(dnn::Mode::kInference);
  return net;
}

}  // namespace flamespec
