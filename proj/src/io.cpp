// Copyright 2026 The bsmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bsmkit/io.hpp"

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace bsm {

using nlohmann::json;

namespace {

// --- payload encoding ----------------------------------------------------------

void append_f64(std::string& out, double v) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

double read_f64(const char* p) {
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) {
    u |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<double>(u);
}

// [F][rows][cols] with interleaved real/imag.
void append_block(std::string& out, const std::vector<Eigen::MatrixXcd>& data) {
  for (const auto& slice : data) {
    for (Eigen::Index r = 0; r < slice.rows(); ++r) {
      for (Eigen::Index c = 0; c < slice.cols(); ++c) {
        append_f64(out, slice(r, c).real());
        append_f64(out, slice(r, c).imag());
      }
    }
  }
}

std::vector<Eigen::MatrixXcd> read_block(const char* p, std::size_t nf, std::size_t rows,
                                         std::size_t cols) {
  std::vector<Eigen::MatrixXcd> data(nf, Eigen::MatrixXcd(rows, cols));
  for (auto& slice : data) {
    for (Eigen::Index r = 0; r < slice.rows(); ++r) {
      for (Eigen::Index c = 0; c < slice.cols(); ++c) {
        slice(r, c) = cplx(read_f64(p), read_f64(p + 8));
        p += 16;
      }
    }
  }
  return data;
}

// Same as block, but stored [F][ear][M] from M x 2 slices.
std::vector<Eigen::MatrixXcd> transposed(const std::vector<Eigen::MatrixXcd>& data) {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(data.size());
  for (const auto& s : data) out.emplace_back(s.transpose());
  return out;
}

std::string crc_hex(const std::string& payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* bytes = reinterpret_cast<const Bytef*>(payload.data());
  std::size_t left = payload.size();
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, bytes, chunk);
    bytes += chunk;
    left -= chunk;
  }
  std::ostringstream os;
  os << std::hex << std::setw(8) << std::setfill('0') << crc;
  return os.str();
}

// --- manifest helpers -------------------------------------------------------------

json distance_json(const SourceDistance& d) {
  if (d.is_plane_wave()) return "planewave";
  return d.value();
}

SourceDistance distance_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "planewave") return SourceDistance::plane_wave();
    throw Error(ErrorCode::kSchemaUnknown, "bad source_distance");
  }
  return SourceDistance::meters(j.get<double>());
}

json grid_json(const DirectionGrid& g) {
  json dirs = json::array();
  for (const auto& d : g.directions()) dirs.push_back({d.theta(), d.phi()});
  return {{"name", g.name()}, {"convention", "theta inclination from +z, phi azimuth, rad"},
          {"directions", dirs}};
}

std::shared_ptr<const DirectionGrid> grid_from_json(const json& j) {
  std::vector<Direction> dirs;
  for (const auto& d : j.at("directions")) {
    dirs.emplace_back(d.at(0).get<double>(), d.at(1).get<double>());
  }
  return std::make_shared<const DirectionGrid>(j.at("name").get<std::string>(), std::move(dirs));
}

json axis_fields(const FrequencyAxis& a) {
  return {{"sample_rate", a.sample_rate()},
          {"fft_size", a.fft_size()},
          {"speed_of_sound", a.speed_of_sound()}};
}

std::shared_ptr<const FrequencyAxis> axis_from_json(const json& m) {
  return std::make_shared<const FrequencyAxis>(m.at("sample_rate").get<double>(),
                                               m.at("fft_size").get<std::size_t>(),
                                               m.at("speed_of_sound").get<double>());
}

json provenance_json(const Provenance& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

Provenance provenance_from_json(const json& m) {
  Provenance p;
  if (m.contains("provenance")) {
    for (const auto& [k, v] : m.at("provenance").items()) p[k] = v.get<std::string>();
  }
  return p;
}

struct Block {
  std::string name;
  std::vector<std::size_t> dims;
  const std::vector<Eigen::MatrixXcd>* data;
};

void write_container(const std::string& path, json manifest, const std::vector<Block>& blocks) {
  std::string payload;
  json block_list = json::array();
  for (const auto& b : blocks) {
    block_list.push_back({{"name", b.name}, {"offset", payload.size()}, {"dims", b.dims}});
    append_block(payload, *b.data);
  }
  manifest["payload"] = {{"bytes", payload.size()},
                         {"encoding", "float64-le interleaved re/im, row-major"},
                         {"blocks", block_list}};
  manifest["payload_checksum"] = "crc32:" + crc_hex(payload);
  const std::string text = manifest.dump(2) + "\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << kContainerMagic << "\n" << text.size() << "\n" << text;
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

struct RawContainer {
  json manifest;
  std::string payload;
  std::size_t payload_offset = 0;
};

RawContainer read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string magic = std::string(kContainerMagic) + "\n";
  if (bytes.compare(0, magic.size(), magic) != 0) {
    throw Error(ErrorCode::kSchemaUnknown, path + " is not a bsmkit container");
  }
  const std::size_t eol = bytes.find('\n', magic.size());
  if (eol == std::string::npos) throw Error(ErrorCode::kSchemaUnknown, "missing manifest length");
  std::size_t mlen = 0;
  const char* first = bytes.data() + magic.size();
  const auto [ptr, ec] = std::from_chars(first, bytes.data() + eol, mlen);
  if (ec != std::errc() || ptr != bytes.data() + eol) {
    throw Error(ErrorCode::kSchemaUnknown, "bad manifest length");
  }
  const std::size_t mstart = eol + 1;
  if (mstart + mlen > bytes.size()) throw Error(ErrorCode::kDimsMismatch, "truncated manifest");
  RawContainer rc;
  try {
    rc.manifest = json::parse(bytes.substr(mstart, mlen));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaUnknown, std::string("manifest: ") + e.what());
  }
  if (rc.manifest.value("schema_version", -1) != kSchemaVersion) {
    throw Error(ErrorCode::kSchemaUnknown, "unsupported schema_version");
  }
  rc.payload_offset = mstart + mlen;
  rc.payload = bytes.substr(rc.payload_offset);
  return rc;
}

// Validates sizes and checksum; returns the block pointer by name.
const char* checked_block(const RawContainer& rc, const std::string& name,
                          const std::vector<std::size_t>& expect_dims) {
  const json& pl = rc.manifest.at("payload");
  for (const auto& b : pl.at("blocks")) {
    if (b.at("name").get<std::string>() != name) continue;
    const auto dims = b.at("dims").get<std::vector<std::size_t>>();
    if (dims != expect_dims) throw Error(ErrorCode::kDimsMismatch, "block '" + name + "' dims");
    std::size_t count = 16;
    for (std::size_t d : dims) count *= d;
    const std::size_t off = b.at("offset").get<std::size_t>();
    if (off + count > rc.payload.size()) {
      throw Error(ErrorCode::kDimsMismatch, "payload shorter than block '" + name + "'");
    }
    return rc.payload.data() + off;
  }
  throw Error(ErrorCode::kSchemaUnknown, "missing block '" + name + "'");
}

void verify_payload(const RawContainer& rc) {
  const json& pl = rc.manifest.at("payload");
  std::size_t expected = 0;
  for (const auto& b : pl.at("blocks")) {
    std::size_t count = 16;
    for (std::size_t d : b.at("dims").get<std::vector<std::size_t>>()) count *= d;
    expected += count;
  }
  if (rc.payload.size() != expected || pl.at("bytes").get<std::size_t>() != expected) {
    std::ostringstream os;
    os << "payload has " << rc.payload.size() << " bytes, dims imply " << expected;
    throw Error(ErrorCode::kDimsMismatch, os.str());
  }
  const std::string want = rc.manifest.at("payload_checksum").get<std::string>();
  if (want != "crc32:" + crc_hex(rc.payload)) {
    throw Error(ErrorCode::kChecksumMismatch, "payload checksum does not match manifest");
  }
}

std::vector<std::size_t> dims_of(const json& m) { return m.at("dims").get<std::vector<std::size_t>>(); }

SteeringSet steering_from(const RawContainer& rc) {
  const json& m = rc.manifest;
  const auto dims = dims_of(m);
  if (dims.size() != 3) throw Error(ErrorCode::kDimsMismatch, "steering dims must have 3 entries");
  SteeringSet s;
  s.freq_axis = axis_from_json(m);
  s.grid = grid_from_json(m.at("grid"));
  std::vector<Eigen::Vector3d> pos;
  for (const auto& p : m.at("geometry").at("positions")) {
    pos.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  }
  s.geometry = std::make_shared<const ArrayGeometry>(
      std::move(pos), m.at("geometry").at("labels").get<std::vector<std::string>>());
  if (dims[0] != s.freq_axis->size() || dims[1] != s.geometry->size() || dims[2] != s.grid->size()) {
    throw Error(ErrorCode::kDimsMismatch, "dims disagree with axis/geometry/grid");
  }
  s.source_distance = distance_from_json(m.at("source_distance"));
  s.convention = m.value("convention", "");
  s.provenance = provenance_from_json(m);
  s.data = read_block(checked_block(rc, "data", dims), dims[0], dims[1], dims[2]);
  return s;
}

HrtfSet hrtf_from(const RawContainer& rc) {
  const json& m = rc.manifest;
  const auto dims = dims_of(m);
  if (dims.size() != 3 || dims[1] != 2) throw Error(ErrorCode::kDimsMismatch, "HRTF dims must be [F,2,Q]");
  HrtfSet h;
  h.freq_axis = axis_from_json(m);
  h.grid = grid_from_json(m.at("grid"));
  if (dims[0] != h.freq_axis->size() || dims[2] != h.grid->size()) {
    throw Error(ErrorCode::kDimsMismatch, "dims disagree with axis/grid");
  }
  h.source_distance = distance_from_json(m.at("source_distance"));
  h.convention = m.value("convention", "");
  h.provenance = provenance_from_json(m);
  h.data = read_block(checked_block(rc, "data", dims), dims[0], 2, dims[2]);
  return h;
}

BsmFilterBank filterbank_from(const RawContainer& rc) {
  const json& m = rc.manifest;
  const auto dims = dims_of(m);
  if (dims.size() != 3 || dims[1] != 2) throw Error(ErrorCode::kDimsMismatch, "filter dims must be [F,2,M]");
  BsmFilterBank b;
  b.freq_axis = axis_from_json(m);
  if (dims[0] != b.freq_axis->size()) throw Error(ErrorCode::kDimsMismatch, "dims disagree with axis");
  b.criterion = criterion_from_string(m.at("criterion").get<std::string>());
  b.mix_mode = mix_mode_from_string(m.value("mix_mode", "blend"));
  b.noise = NoiseModel(m.at("noise").at("sigma_s_sq").get<double>(),
                       m.at("noise").at("sigma_n_sq").get<double>());
  b.schedule.lo_hz = m.at("alpha").at("lo_hz").get<double>();
  b.schedule.hi_hz = m.at("alpha").at("hi_hz").get<double>();
  b.design_distance = distance_from_json(m.at("source_distance"));
  if (m.contains("fov") && !m.at("fov").is_null()) {
    const json& f = m.at("fov");
    FovSpec fov;
    fov.az_halfwidth = f.at("az_halfwidth").get<double>();
    fov.el_halfwidth = f.at("el_halfwidth").get<double>();
    fov.center = Direction(f.at("center_theta").get<double>(), f.at("center_phi").get<double>());
    fov.beta = f.at("beta").get<double>();
    fov.validate();
    b.fov = fov;
  }
  b.magls_diagnostics.unconverged_bins = m.value("magls_unconverged_bins", std::size_t{0});
  b.provenance = provenance_from_json(m);
  auto load = [&](const std::string& name) {
    return transposed(read_block(checked_block(rc, name, dims), dims[0], 2, dims[2]));
  };
  b.weights = load("weights");
  for (const auto& blk : m.at("payload").at("blocks")) {
    const auto name = blk.at("name").get<std::string>();
    if (name == "ls") b.ls_weights = load("ls");
    if (name == "magls") b.magls_weights = load("magls");
  }
  return b;
}

json base_manifest(const std::string& kind, std::vector<std::size_t> dims) {
  return {{"schema_version", kSchemaVersion}, {"kind", kind}, {"dims", std::move(dims)}};
}

}  // namespace

void save_dataset(const SteeringSet& set, const std::string& path) {
  if (!set.geometry || !set.grid || !set.freq_axis) {
    throw Error(ErrorCode::kInvalidArgument, "steering set is incomplete");
  }
  const std::vector<std::size_t> dims = {set.num_freqs(), set.num_mics(), set.num_dirs()};
  json m = base_manifest("steering", dims);
  m.update(axis_fields(*set.freq_axis));
  m["source_distance"] = distance_json(set.source_distance);
  m["grid"] = grid_json(*set.grid);
  json pos = json::array();
  for (const auto& p : set.geometry->mic_positions) pos.push_back({p.x(), p.y(), p.z()});
  m["geometry"] = {{"units", "m"}, {"labels", set.geometry->labels}, {"positions", pos}};
  m["convention"] = set.convention;
  m["provenance"] = provenance_json(set.provenance);
  write_container(path, m, {{"data", dims, &set.data}});
}

void save_dataset(const HrtfSet& set, const std::string& path) {
  if (!set.grid || !set.freq_axis) throw Error(ErrorCode::kInvalidArgument, "HRTF set is incomplete");
  const std::vector<std::size_t> dims = {set.num_freqs(), 2, set.num_dirs()};
  json m = base_manifest("hrtf", dims);
  m.update(axis_fields(*set.freq_axis));
  m["source_distance"] = distance_json(set.source_distance);
  m["grid"] = grid_json(*set.grid);
  m["convention"] = set.convention;
  m["provenance"] = provenance_json(set.provenance);
  write_container(path, m, {{"data", dims, &set.data}});
}

void save_dataset(const BsmFilterBank& bank, const std::string& path) {
  if (!bank.freq_axis) throw Error(ErrorCode::kInvalidArgument, "filter bank has no axis");
  const std::vector<std::size_t> dims = {bank.num_freqs(), 2, bank.num_mics()};
  json m = base_manifest("filterbank", dims);
  m.update(axis_fields(*bank.freq_axis));
  m["source_distance"] = distance_json(bank.design_distance);
  m["criterion"] = to_string(bank.criterion);
  m["mix_mode"] = to_string(bank.mix_mode);
  m["noise"] = {{"sigma_s_sq", bank.noise.sigma_s_sq}, {"sigma_n_sq", bank.noise.sigma_n_sq}};
  m["alpha"] = {{"lo_hz", bank.schedule.lo_hz}, {"hi_hz", bank.schedule.hi_hz}};
  m["magls_cutoff_hz"] = bank.magls_cutoff_hz();
  if (bank.fov) {
    m["fov"] = {{"az_halfwidth", bank.fov->az_halfwidth}, {"el_halfwidth", bank.fov->el_halfwidth},
                {"center_theta", bank.fov->center.theta()}, {"center_phi", bank.fov->center.phi()},
                {"beta", bank.fov->beta}};
  } else {
    m["fov"] = nullptr;
  }
  m["magls_unconverged_bins"] = bank.magls_diagnostics.unconverged_bins;
  m["provenance"] = provenance_json(bank.provenance);
  const auto w = transposed(bank.weights);
  std::vector<Block> blocks = {{"weights", dims, &w}};
  std::vector<Eigen::MatrixXcd> ls, mag;
  if (bank.ls_weights) {
    ls = transposed(*bank.ls_weights);
    blocks.push_back({"ls", dims, &ls});
  }
  if (bank.magls_weights) {
    mag = transposed(*bank.magls_weights);
    blocks.push_back({"magls", dims, &mag});
  }
  write_container(path, m, blocks);
}

Dataset load_dataset(const std::string& path) {
  const RawContainer rc = read_container(path);
  try {
    verify_payload(rc);
    const std::string kind = rc.manifest.at("kind").get<std::string>();
    if (kind == "steering") return steering_from(rc);
    if (kind == "hrtf") return hrtf_from(rc);
    if (kind == "filterbank") return filterbank_from(rc);
    throw Error(ErrorCode::kSchemaUnknown, "unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaUnknown, std::string("manifest: ") + e.what());
  }
}

namespace {

template <typename T>
T load_kind(const std::string& path, const char* what) {
  Dataset d = load_dataset(path);
  if (auto* p = std::get_if<T>(&d)) return std::move(*p);
  throw Error(ErrorCode::kIncompatible, path + " does not hold " + what);
}

}  // namespace

SteeringSet load_steering(const std::string& path) { return load_kind<SteeringSet>(path, "a steering set"); }
HrtfSet load_hrtf(const std::string& path) { return load_kind<HrtfSet>(path, "an HRTF set"); }
BsmFilterBank load_filterbank(const std::string& path) {
  return load_kind<BsmFilterBank>(path, "a filter bank");
}

std::size_t container_payload_offset(const std::string& path) {
  return read_container(path).payload_offset;
}

// --- CSV ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc()) throw Error(ErrorCode::kSchemaUnknown, "bad CSV number '" + s + "'");
  return v;
}

constexpr const char* kFreqHeader =
    "f_hz,eps_ls_l,eps_ls_r,eps_magls_l,eps_magls_r,eps_mix_l,eps_mix_r,xi_null_l,xi_null_r";
constexpr const char* kDirHeader = "az_deg,el_deg,metric,ref,rep,abs_err,region_tag";

}  // namespace

void export_report_csv(const MetricsReport& report, const std::string& freq_path,
                       const std::string& dir_path) {
  std::ofstream fq(freq_path, std::ios::trunc);
  if (!fq) throw Error(ErrorCode::kIo, "cannot write " + freq_path);
  fq << kFreqHeader << "\n";
  for (const auto& r : report.frequency_rows) {
    fq << format_double(r.f_hz);
    for (const auto* col : {&r.eps_ls, &r.eps_magls, &r.eps_mix, &r.xi_null}) {
      fq << "," << opt_field((*col)[0]) << "," << opt_field((*col)[1]);
    }
    fq << "\n";
  }
  std::ofstream dq(dir_path, std::ios::trunc);
  if (!dq) throw Error(ErrorCode::kIo, "cannot write " + dir_path);
  dq << kDirHeader << "\n";
  for (const auto& r : report.direction_rows) {
    dq << format_double(r.az_deg) << "," << format_double(r.el_deg) << "," << r.metric << ","
       << format_double(r.ref) << "," << format_double(r.rep) << "," << format_double(r.abs_err)
       << "," << to_string(r.region) << "\n";
  }
  if (!fq || !dq) throw Error(ErrorCode::kIo, "CSV write failed");
}

MetricsReport load_report_csv(const std::string& freq_path, const std::string& dir_path) {
  MetricsReport rep;
  std::ifstream fq(freq_path);
  std::ifstream dq(dir_path);
  if (!fq || !dq) throw Error(ErrorCode::kIo, "cannot open report CSV");
  std::string line;
  if (!std::getline(fq, line) || line != kFreqHeader) {
    throw Error(ErrorCode::kSchemaUnknown, "unexpected frequency CSV header");
  }
  while (std::getline(fq, line)) {
    const auto c = split_csv(line);
    if (c.size() != 9) throw Error(ErrorCode::kSchemaUnknown, "frequency row needs 9 columns");
    FrequencyRow r;
    r.f_hz = *parse_opt(c[0]);
    r.eps_ls = {parse_opt(c[1]), parse_opt(c[2])};
    r.eps_magls = {parse_opt(c[3]), parse_opt(c[4])};
    r.eps_mix = {parse_opt(c[5]), parse_opt(c[6])};
    r.xi_null = {parse_opt(c[7]), parse_opt(c[8])};
    rep.frequency_rows.push_back(r);
  }
  if (!std::getline(dq, line) || line != kDirHeader) {
    throw Error(ErrorCode::kSchemaUnknown, "unexpected direction CSV header");
  }
  while (std::getline(dq, line)) {
    const auto c = split_csv(line);
    if (c.size() != 7) throw Error(ErrorCode::kSchemaUnknown, "direction row needs 7 columns");
    DirectionRow r;
    r.az_deg = *parse_opt(c[0]);
    r.el_deg = *parse_opt(c[1]);
    r.metric = c[2];
    r.ref = *parse_opt(c[3]);
    r.rep = *parse_opt(c[4]);
    r.abs_err = *parse_opt(c[5]);
    r.region = region_from_string(c[6]);
    rep.direction_rows.push_back(r);
  }
  return rep;
}

}  // namespace bsm
