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

#include "bsmkit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "bsmkit/core.hpp"
#include "bsmkit/design.hpp"
#include "bsmkit/dsp.hpp"
#include "bsmkit/io.hpp"
#include "bsmkit/metrics.hpp"
#include "bsmkit/parallel.hpp"
#include "bsmkit/scene.hpp"
#include "bsmkit/steering.hpp"

namespace bsm::cli {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kBadFrameConfig:
      return kExitUsage;
    case ErrorCode::kSingularSystem:
    case ErrorCode::kNoConvergence:
    case ErrorCode::kZeroReference:
    case ErrorCode::kSilentChannel:
    case ErrorCode::kAllBinsExcluded:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, what + ": '" + s + "' is not a number");
  }
}

SourceDistance parse_distance(const std::string& s) {
  if (s == "planewave" || s == "plane-wave" || s == "inf") return SourceDistance::plane_wave();
  return SourceDistance::meters(parse_number(s, "distance"));
}

std::string join_args(const std::string& cmd, const std::vector<std::string>& args) {
  std::string out = "bsmkit " + cmd;
  for (const auto& a : args) out += " " + a;
  return out;
}

// "lebedev-2702", "ring:N", or a text file. File lines hold "theta phi" in
// radians; a "# units: deg-elevation" header switches to "az_deg el_deg".
std::shared_ptr<const DirectionGrid> load_grid(const std::string& spec) {
  if (spec == "lebedev-2702") {
    return std::make_shared<const DirectionGrid>(DirectionGrid::lebedev_2702());
  }
  if (spec.rfind("ring:", 0) == 0) {
    const double n = parse_number(spec.substr(5), "ring size");
    if (n < 1 || n != std::floor(n)) throw Error(ErrorCode::kInvalidArgument, "ring:N needs N >= 1");
    return std::make_shared<const DirectionGrid>(DirectionGrid::ring(static_cast<std::size_t>(n)));
  }
  std::ifstream in(spec);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "unknown grid '" + spec + "'");
  bool deg = false;
  std::vector<Direction> dirs;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("deg-elevation") != std::string::npos) deg = true;
      continue;
    }
    std::istringstream is(line);
    double a = 0.0, b = 0.0;
    if (!(is >> a >> b)) throw Error(ErrorCode::kSchemaUnknown, "bad grid line '" + line + "'");
    dirs.push_back(deg ? Direction::from_az_el_deg(a, b) : Direction(a, b));
  }
  return std::make_shared<const DirectionGrid>(std::filesystem::path(spec).filename().string(),
                                               std::move(dirs));
}

// "builtin-glasses" or a text file with "label x y z" lines in meters.
std::shared_ptr<const ArrayGeometry> load_geometry(const std::string& spec) {
  if (spec == "builtin-glasses") {
    return std::make_shared<const ArrayGeometry>(ArrayGeometry::builtin_glasses());
  }
  std::ifstream in(spec);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "unknown geometry '" + spec + "'");
  std::vector<Eigen::Vector3d> pos;
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string label;
    double x = 0.0, y = 0.0, z = 0.0;
    if (!(is >> label >> x >> y >> z)) {
      throw Error(ErrorCode::kSchemaUnknown, "bad geometry line '" + line + "'");
    }
    labels.push_back(label);
    pos.emplace_back(x, y, z);
  }
  if (pos.empty()) throw Error(ErrorCode::kSchemaUnknown, "geometry file has no microphones");
  return std::make_shared<const ArrayGeometry>(std::move(pos), std::move(labels));
}

// "none" or "az:el:beta" in degrees.
std::optional<FovSpec> parse_fov(const std::string& s) {
  if (s == "none") return std::nullopt;
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw Error(ErrorCode::kInvalidArgument, "--fov expects az:el:beta or none");
  FovSpec fov;
  fov.az_halfwidth = deg2rad(parse_number(parts[0], "fov azimuth"));
  fov.el_halfwidth = deg2rad(parse_number(parts[1], "fov elevation"));
  fov.beta = parse_number(parts[2], "fov beta");
  fov.validate();
  return fov;
}

HrtfSet rotated(const HrtfSet& h, double deg) {
  if (deg == 0.0) return h;
  return rotate_hrtf(h, deg2rad(deg)).hrtf;
}

// --- shared design/evaluate steps (used by sweep for identical outputs) -------

struct DesignParams {
  Criterion criterion = Criterion::kMixed;
  double snr_db = 20.0;
  std::optional<FovSpec> fov;
  MixMode mix_mode = MixMode::kBlend;
  double rotation_deg = 0.0;
};

BsmFilterBank run_design(const SteeringSet& v, const HrtfSet& h, const DesignParams& p) {
  DesignOptions opts;
  opts.criterion = p.criterion;
  opts.noise = NoiseModel::from_snr_db(p.snr_db);
  opts.fov = p.fov;
  opts.mix_mode = p.mix_mode;
  return design(v, rotated(h, p.rotation_deg), opts);
}

struct EvalParams {
  double rotation_deg = 0.0;
  RegionTag region = RegionTag::kAll;
  bool per_direction = true;
};

MetricsReport run_evaluate(const BsmFilterBank& c, const SteeringSet& v, const HrtfSet& h,
                           const EvalParams& p) {
  EvaluateOptions opts;
  opts.region = p.region;
  opts.per_direction = p.per_direction;
  return evaluate(c, v, rotated(h, p.rotation_deg), opts);
}

void write_report(const MetricsReport& r, const std::string& prefix) {
  const auto parent = std::filesystem::path(prefix + "_freq.csv").parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  export_report_csv(r, prefix + "_freq.csv", prefix + "_dir.csv");
}

// --- subcommands --------------------------------------------------------------

struct AxisFlags {
  double fs = 48000.0;
  std::size_t nfft = 512;
  double c = kDefaultSpeedOfSound;

  void add(CLI::App* app) {
    app->add_option("--fs", fs, "Sample rate, Hz")->capture_default_str();
    app->add_option("--nfft", nfft, "FFT size (even)")->capture_default_str();
    app->add_option("--speed-of-sound", c, "m/s")->capture_default_str();
  }
  std::shared_ptr<const FrequencyAxis> axis() const {
    return std::make_shared<const FrequencyAxis>(fs, nfft, c);
  }
};

struct Context {
  std::vector<std::string> args;
  std::string command;
};

int cmd_gen_steering(const Context& ctx, const std::string& geometry, const std::string& grid,
                     const std::string& distance, const AxisFlags& axis, const std::string& out) {
  SteeringSet v = make_steering(load_geometry(geometry), load_grid(grid), parse_distance(distance),
                                axis.axis());
  v.provenance["command"] = ctx.command;
  save_dataset(v, out);
  std::cout << "wrote " << out << " (" << v.num_freqs() << " bins, " << v.num_mics() << " mics, "
            << v.num_dirs() << " directions)\n";
  return kExitOk;
}

int cmd_gen_hrtf(const Context& ctx, const std::string& grid, const std::string& distance,
                 double ear_offset, const AxisFlags& axis, const std::string& out) {
  HrtfSet h = free_field_ear_proxy(load_grid(grid), parse_distance(distance), axis.axis(),
                                   ear_offset);
  h.provenance["command"] = ctx.command;
  save_dataset(h, out);
  std::cout << "wrote " << out << " (" << h.num_freqs() << " bins, " << h.num_dirs()
            << " directions)\n";
  return kExitOk;
}

int cmd_design(const Context& ctx, const std::string& steering, const std::string& hrtf,
               const DesignParams& p, const std::string& out) {
  const SteeringSet v = load_steering(steering);
  const HrtfSet h = load_hrtf(hrtf);
  BsmFilterBank c = run_design(v, h, p);
  c.provenance["command"] = ctx.command;
  c.provenance["rotation_deg"] = format_double(p.rotation_deg);
  c.provenance["steering_file"] = steering;
  c.provenance["hrtf_file"] = hrtf;
  save_dataset(c, out);
  std::cout << "wrote " << out << " (" << to_string(c.criterion) << ", "
            << c.magls_diagnostics.unconverged_bins << " unconverged bins)\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& filter, const std::string& steering, const std::string& hrtf,
                 const EvalParams& p, const std::string& prefix) {
  const BsmFilterBank c = load_filterbank(filter);
  const SteeringSet v = load_steering(steering);
  const HrtfSet h = load_hrtf(hrtf);
  const MetricsReport r = run_evaluate(c, v, h, p);
  write_report(r, prefix);
  const ReportSummary s = summarize(r);
  std::cout << "wrote " << prefix << "_freq.csv and " << prefix << "_dir.csv";
  if (s.eps_mix_avg[0]) std::cout << "; mean mixed error (L) " << *s.eps_mix_avg[0];
  if (s.ild_err_avg) std::cout << "; mean ILD error " << *s.ild_err_avg << " dB (JND " << kIldJndDb << " dB)";
  if (s.itd_err_avg) {
    std::cout << "; mean ITD error " << *s.itd_err_avg * 1e6 << " us (JND " << kItdJndFrontalS * 1e6
              << " us frontal, " << kItdJndLateralS * 1e6 << " us lateral)";
  }
  std::cout << "\n";
  return kExitOk;
}

struct SweepFlags {
  std::vector<std::string> distances{"0.15", "0.2", "0.45", "0.7", "1.0", "1.5"};
  std::vector<std::string> rotations{"0"};
  std::vector<std::string> criteria;
  std::vector<std::string> fov_betas{"none"};
  std::string fov_aperture = "45:45";
  std::string out_dir;
  std::string steering_pattern;
  std::string hrtf_pattern;
  std::string geometry = "builtin-glasses";
  std::string grid = "lebedev-2702";
  std::string design_distance;
  std::string rotation_placement = "design";
  std::string region = "all";
  double snr_db = 20.0;
  bool per_direction = true;
  AxisFlags axis;
};

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::string csv_opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) out.push_back((std::isalnum(static_cast<unsigned char>(ch)) || ch == '.') ? ch : '-');
  return out;
}

int cmd_sweep(const SweepFlags& f) {
  if (f.criteria.empty() || std::any_of(f.criteria.begin(), f.criteria.end(),
                                        [](const std::string& s) { return s.empty(); })) {
    throw Error(ErrorCode::kInvalidArgument, "--criteria must list at least one criterion");
  }
  if (f.distances.empty() || f.rotations.empty() || f.fov_betas.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sweep lists must not be empty");
  }
  if (f.rotation_placement != "design" && f.rotation_placement != "eval-only") {
    throw Error(ErrorCode::kInvalidArgument, "--rotation-placement must be design or eval-only");
  }
  if (f.steering_pattern.empty() != f.hrtf_pattern.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "--steering-pattern and --hrtf-pattern must be given together");
  }
  std::vector<Criterion> criteria;
  for (const auto& c : f.criteria) criteria.push_back(criterion_from_string(c));
  std::vector<double> rotations;
  for (const auto& r : f.rotations) rotations.push_back(parse_number(r, "rotation"));
  for (const auto& d : f.distances) parse_distance(d);
  std::vector<std::optional<FovSpec>> fovs;
  for (const auto& b : f.fov_betas) {
    fovs.push_back(b == "none" ? std::nullopt : parse_fov(f.fov_aperture + ":" + b));
  }
  const RegionTag region = region_from_string(f.region);

  struct Cell {
    std::string distance, rotation, criterion, beta, name;
    std::size_t di, ri, ci, bi;
  };
  std::vector<Cell> cells;
  for (std::size_t di = 0; di < f.distances.size(); ++di) {
    for (std::size_t ri = 0; ri < f.rotations.size(); ++ri) {
      for (std::size_t ci = 0; ci < criteria.size(); ++ci) {
        for (std::size_t bi = 0; bi < fovs.size(); ++bi) {
          Cell c{f.distances[di], f.rotations[ri], f.criteria[ci], f.fov_betas[bi], "", di, ri, ci, bi};
          std::ostringstream name;
          name << "cell" << std::setw(4) << std::setfill('0') << cells.size() << "_d"
               << sanitize(c.distance) << "_rot" << sanitize(c.rotation) << "_" << c.criterion
               << "_beta" << sanitize(c.beta);
          c.name = name.str();
          cells.push_back(c);
        }
      }
    }
  }
  std::filesystem::create_directories(f.out_dir);

  // Datasets are loaded or generated once per distance and shared by cells.
  std::mutex cache_mu;
  std::map<std::string, std::shared_ptr<std::pair<SteeringSet, HrtfSet>>> cache;
  auto dataset = [&](const std::string& d) {
    {
      std::lock_guard<std::mutex> lock(cache_mu);
      if (auto it = cache.find(d); it != cache.end()) return it->second;
    }
    std::shared_ptr<std::pair<SteeringSet, HrtfSet>> data;
    if (!f.steering_pattern.empty()) {
      data = std::make_shared<std::pair<SteeringSet, HrtfSet>>(
          load_steering(replace_all(f.steering_pattern, "{d}", d)),
          load_hrtf(replace_all(f.hrtf_pattern, "{d}", d)));
    } else {
      const auto axis = f.axis.axis();
      const auto grid = load_grid(f.grid);
      const SourceDistance dist = parse_distance(d);
      data = std::make_shared<std::pair<SteeringSet, HrtfSet>>(
          make_steering(load_geometry(f.geometry), grid, dist, axis),
          free_field_ear_proxy(grid, dist, axis));
    }
    std::lock_guard<std::mutex> lock(cache_mu);
    return cache.emplace(d, data).first->second;
  };

  struct Outcome {
    bool ok = false;
    std::string error;
    ReportSummary summary;
  };
  std::vector<Outcome> outcomes(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Cell& cell = cells[i];
    Outcome& o = outcomes[i];
    try {
      const auto eval_data = dataset(cell.distance);
      const auto design_data =
          f.design_distance.empty() ? eval_data : dataset(f.design_distance);
      DesignParams dp;
      dp.criterion = criteria[cell.ci];
      dp.snr_db = f.snr_db;
      dp.fov = fovs[cell.bi];
      dp.rotation_deg = f.rotation_placement == "design" ? rotations[cell.ri] : 0.0;
      const BsmFilterBank c = run_design(design_data->first, design_data->second, dp);
      EvalParams ep;
      ep.rotation_deg = rotations[cell.ri];
      ep.region = region;
      ep.per_direction = f.per_direction;
      const MetricsReport r = run_evaluate(c, eval_data->first, eval_data->second, ep);
      write_report(r, (std::filesystem::path(f.out_dir) / cell.name).string());
      o.summary = summarize(r);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });

  std::ofstream sum(std::filesystem::path(f.out_dir) / "summary.csv", std::ios::trunc);
  if (!sum) throw Error(ErrorCode::kIo, "cannot write summary.csv");
  sum << "cell,distance,rotation_deg,criterion,fov_beta,status,eps_mix_avg_l,eps_mix_avg_r,"
         "eps_ls_avg_l,eps_ls_avg_r,eps_magls_avg_l,eps_magls_avg_r,ild_err_avg,itd_err_avg,error\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const Outcome& o = outcomes[i];
    std::string err = o.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    sum << c.name << "," << c.distance << "," << c.rotation << "," << c.criterion << "," << c.beta
        << "," << (o.ok ? "ok" : "failed") << "," << csv_opt(o.summary.eps_mix_avg[0]) << ","
        << csv_opt(o.summary.eps_mix_avg[1]) << "," << csv_opt(o.summary.eps_ls_avg[0]) << ","
        << csv_opt(o.summary.eps_ls_avg[1]) << "," << csv_opt(o.summary.eps_magls_avg[0]) << ","
        << csv_opt(o.summary.eps_magls_avg[1]) << "," << csv_opt(o.summary.ild_err_avg) << ","
        << csv_opt(o.summary.itd_err_avg) << "," << err << "\n";
    if (!o.ok) {
      ++failed;
      std::cerr << "cell " << c.name << " failed: " << o.error << "\n";
    }
  }
  std::cout << cells.size() - failed << "/" << cells.size() << " cells succeeded; summary in "
            << (std::filesystem::path(f.out_dir) / "summary.csv").string() << "\n";
  return kExitOk;
}

// "synth:az=30,el=0,seconds=1,seed=1,snr=none". Unlisted keys keep defaults.
struct SynthSpec {
  double az_deg = 0.0;
  double el_deg = 0.0;
  double seconds = 1.0;
  std::uint64_t seed = 1;
  std::optional<double> snr_db;
};

SynthSpec parse_synth(const std::string& s, std::uint64_t default_seed) {
  SynthSpec spec;
  spec.seed = default_seed;
  const std::string body = s.substr(std::string("synth").size());
  if (body.empty()) return spec;
  if (body[0] != ':') throw Error(ErrorCode::kInvalidArgument, "bad synth spec '" + s + "'");
  for (const auto& kv : split(body.substr(1), ',')) {
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "bad synth key '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "az") {
      spec.az_deg = parse_number(val, key);
    } else if (key == "el") {
      spec.el_deg = parse_number(val, key);
    } else if (key == "seconds") {
      spec.seconds = parse_number(val, key);
      if (spec.seconds <= 0.0) throw Error(ErrorCode::kInvalidArgument, "seconds must be > 0");
    } else if (key == "seed") {
      spec.seed = static_cast<std::uint64_t>(parse_number(val, key));
    } else if (key == "snr") {
      if (val != "none") spec.snr_db = parse_number(val, key);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown synth key '" + key + "'");
    }
  }
  return spec;
}

// White-noise source at one grid direction, convolved with the steering
// impulse responses of every microphone.
std::vector<std::vector<double>> synth_mics(const SteeringSet& v, const SynthSpec& spec) {
  const std::size_t q = v.grid->nearest(Direction::from_az_el_deg(spec.az_deg, spec.el_deg)).index;
  const std::size_t n = v.freq_axis->fft_size();
  const auto len = static_cast<std::size_t>(std::llround(spec.seconds * v.freq_axis->sample_rate()));
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> src(len);
  for (auto& s : src) s = gauss(rng);

  std::vector<std::vector<double>> mics(v.num_mics(), std::vector<double>(len, 0.0));
  for (std::size_t m = 0; m < v.num_mics(); ++m) {
    std::vector<cplx> tf(v.num_freqs());
    for (std::size_t k = 0; k < v.num_freqs(); ++k) {
      tf[k] = v.data[k](static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(q));
    }
    const std::vector<double> ir = dsp::irfft(tf, n);
    for (std::size_t t = 0; t < len; ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n && j <= t; ++j) acc += ir[j] * src[t - j];
      mics[m][t] = acc;
    }
  }
  if (spec.snr_db) {
    double power = 0.0;
    for (const auto& ch : mics) {
      for (double x : ch) power += x * x;
    }
    power /= static_cast<double>(mics.size() * std::max<std::size_t>(len, 1));
    std::normal_distribution<double> noise(0.0, std::sqrt(power * std::pow(10.0, -*spec.snr_db / 10.0)));
    for (auto& ch : mics) {
      for (double& x : ch) x += noise(rng);
    }
  }
  return mics;
}

int cmd_render(const std::string& filter, const std::string& mics_spec, const std::string& steering,
               std::uint64_t seed, const std::string& out, const std::string& format,
               std::size_t hop, double headroom_db) {
  const BsmFilterBank c = load_filterbank(filter);
  FrameParams fp;
  fp.frame = c.freq_axis->fft_size();
  fp.hop = hop ? hop : fp.frame / 2;
  const WavFormat wf = wav_format_from_string(format);
  std::vector<std::vector<double>> mics;
  bool synthetic = false;
  if (mics_spec.rfind("synth", 0) == 0) {
    if (steering.empty()) throw Error(ErrorCode::kInvalidArgument, "synth scenes need --steering");
    const SteeringSet v = load_steering(steering);
    if (!v.freq_axis->same_as(*c.freq_axis) || v.num_mics() != c.num_mics()) {
      throw Error(ErrorCode::kIncompatible, "steering set does not match the filter");
    }
    mics = synth_mics(v, parse_synth(mics_spec, seed));
    synthetic = true;
  } else {
    WavData in = read_wav(mics_spec);
    if (std::abs(in.sample_rate - c.freq_axis->sample_rate()) > 0.5) {
      throw Error(ErrorCode::kIncompatible, "WAV sample rate differs from the filter");
    }
    mics = std::move(in.channels);
  }
  BinauralTime y = render_time_domain(c, mics, fp);
  if (synthetic) {
    double peak = 0.0;
    for (double x : y.left) peak = std::max(peak, std::abs(x));
    for (double x : y.right) peak = std::max(peak, std::abs(x));
    if (peak > 0.0) {
      const double g = std::pow(10.0, -headroom_db / 20.0) / peak;
      for (double& x : y.left) x *= g;
      for (double& x : y.right) x *= g;
    }
  }
  WavData w;
  w.sample_rate = static_cast<int>(std::lround(y.sample_rate));
  w.channels = {std::move(y.left), std::move(y.right)};
  write_wav(out, w, wf);
  std::cout << "wrote " << out << " (" << w.channels[0].size() << " frames)\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"bsmkit: binaural signal matching for wearable arrays"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bsmkit 0.1.0");

  Context ctx;
  ctx.args = args;

  // gen-steering
  auto* gs = app.add_subcommand("gen-steering", "Generate an analytic steering set");
  std::string gs_geometry = "builtin-glasses", gs_grid = "lebedev-2702", gs_distance, gs_out;
  AxisFlags gs_axis;
  gs->add_option("--geometry", gs_geometry, "builtin-glasses or file")->capture_default_str();
  gs->add_option("--grid", gs_grid, "lebedev-2702, ring:N or file")->capture_default_str();
  gs->add_option("--distance", gs_distance, "meters or planewave")->required();
  gs_axis.add(gs);
  gs->add_option("--out", gs_out, "Output container")->required();

  // gen-hrtf
  auto* gh = app.add_subcommand("gen-hrtf", "Generate the free-field two-point ear proxy");
  std::string gh_grid = "lebedev-2702", gh_distance, gh_out;
  double gh_offset = 0.09;
  AxisFlags gh_axis;
  gh->add_option("--grid", gh_grid, "lebedev-2702, ring:N or file")->capture_default_str();
  gh->add_option("--distance", gh_distance, "meters or planewave")->required();
  gh->add_option("--ear-offset", gh_offset, "Ear distance from the origin, m")->capture_default_str();
  gh_axis.add(gh);
  gh->add_option("--out", gh_out, "Output container")->required();

  // design
  auto* ds = app.add_subcommand("design", "Design a BSM filter bank");
  std::string ds_steering, ds_hrtf, ds_criterion = "mixed", ds_fov = "none", ds_mix = "blend", ds_out;
  double ds_snr = 20.0, ds_rot = 0.0;
  ds->add_option("--steering", ds_steering, "Steering container")->required();
  ds->add_option("--hrtf", ds_hrtf, "HRTF container")->required();
  ds->add_option("--criterion", ds_criterion, "ls, magls or mixed")->capture_default_str();
  ds->add_option("--snr-db", ds_snr, "Signal-to-noise ratio, dB")->capture_default_str();
  ds->add_option("--fov", ds_fov, "az:el:beta in degrees, or none")->capture_default_str();
  ds->add_option("--mix-mode", ds_mix, "blend or switch")->capture_default_str();
  ds->add_option("--rotation-deg", ds_rot, "Rotate the target HRTF by this azimuth")
      ->capture_default_str();
  ds->add_option("--out", ds_out, "Output filter container")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Evaluate a filter bank");
  std::string ev_filter, ev_steering, ev_hrtf, ev_region = "all", ev_prefix;
  double ev_rot = 0.0;
  bool ev_no_dir = false;
  ev->add_option("--filter", ev_filter, "Filter container")->required();
  ev->add_option("--steering-eval", ev_steering, "Steering container")->required();
  ev->add_option("--hrtf-eval", ev_hrtf, "HRTF container")->required();
  ev->add_option("--rotation-deg", ev_rot, "Rotate the reference HRTF by this azimuth")
      ->capture_default_str();
  ev->add_option("--region", ev_region, "all, in-fov or out-fov")->capture_default_str();
  ev->add_flag("--no-per-direction", ev_no_dir, "Skip the ILD/ITD table");
  ev->add_option("--out-prefix", ev_prefix, "Writes <prefix>_freq.csv and <prefix>_dir.csv")
      ->required();

  // sweep
  auto* sw = app.add_subcommand("sweep", "Evaluate a grid of conditions");
  SweepFlags swf;
  sw->add_option("--distances", swf.distances, "Comma-separated, meters or planewave")
      ->delimiter(',');
  sw->add_option("--rotations", swf.rotations, "Comma-separated, degrees")->delimiter(',');
  sw->add_option("--criteria", swf.criteria, "Comma-separated ls,magls,mixed")
      ->delimiter(',')
      ->required();
  sw->add_option("--fov-betas", swf.fov_betas, "Comma-separated betas or none")->delimiter(',');
  sw->add_option("--fov-aperture", swf.fov_aperture, "az:el half-widths, degrees")
      ->capture_default_str();
  sw->add_option("--out-dir", swf.out_dir, "Output directory")->required();
  sw->add_option("--steering-pattern", swf.steering_pattern, "Container path with {d}");
  sw->add_option("--hrtf-pattern", swf.hrtf_pattern, "Container path with {d}");
  sw->add_option("--geometry", swf.geometry, "Analytic data: geometry")->capture_default_str();
  sw->add_option("--grid", swf.grid, "Analytic data: grid")->capture_default_str();
  sw->add_option("--design-distance", swf.design_distance,
                 "Design every cell at this distance instead of the evaluation distance");
  sw->add_option("--rotation-placement", swf.rotation_placement, "design or eval-only")
      ->capture_default_str();
  sw->add_option("--region", swf.region, "all, in-fov or out-fov")->capture_default_str();
  sw->add_option("--snr-db", swf.snr_db, "Signal-to-noise ratio, dB")->capture_default_str();
  bool sw_no_dir = false;
  sw->add_flag("--no-per-direction", sw_no_dir, "Skip the ILD/ITD tables");
  swf.axis.add(sw);

  // render
  auto* rd = app.add_subcommand("render", "Render binaural audio from microphone signals");
  std::string rd_filter, rd_mics, rd_steering, rd_out, rd_format = "f32";
  std::uint64_t rd_seed = 1;
  std::size_t rd_hop = 0;
  double rd_headroom = 12.0;
  rd->add_option("--filter", rd_filter, "Filter container")->required();
  rd->add_option("--mics", rd_mics, "Multichannel WAV, or synth:az=..,el=..,seconds=..,seed=..")
      ->required();
  rd->add_option("--steering", rd_steering, "Steering container for synth scenes");
  rd->add_option("--seed", rd_seed, "Seed for synth scenes")->capture_default_str();
  rd->add_option("--hop", rd_hop, "STFT hop (default: half the FFT size)");
  rd->add_option("--format", rd_format, "pcm16, pcm24 or f32")->capture_default_str();
  rd->add_option("--headroom-db", rd_headroom, "Peak level of synth renders below 0 dBFS")
      ->capture_default_str();
  rd->add_option("--out", rd_out, "Output WAV")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gs) {
      ctx.command = join_args("gen-steering", std::vector<std::string>(args.begin() + 1, args.end()));
      return cmd_gen_steering(ctx, gs_geometry, gs_grid, gs_distance, gs_axis, gs_out);
    }
    if (*gh) {
      ctx.command = join_args("gen-hrtf", std::vector<std::string>(args.begin() + 1, args.end()));
      return cmd_gen_hrtf(ctx, gh_grid, gh_distance, gh_offset, gh_axis, gh_out);
    }
    if (*ds) {
      ctx.command = join_args("design", std::vector<std::string>(args.begin() + 1, args.end()));
      DesignParams p;
      p.criterion = criterion_from_string(ds_criterion);
      p.snr_db = ds_snr;
      p.fov = parse_fov(ds_fov);
      p.mix_mode = mix_mode_from_string(ds_mix);
      p.rotation_deg = ds_rot;
      return cmd_design(ctx, ds_steering, ds_hrtf, p, ds_out);
    }
    if (*ev) {
      EvalParams p;
      p.rotation_deg = ev_rot;
      p.region = region_from_string(ev_region);
      p.per_direction = !ev_no_dir;
      return cmd_evaluate(ev_filter, ev_steering, ev_hrtf, p, ev_prefix);
    }
    if (*sw) {
      swf.per_direction = !sw_no_dir;
      return cmd_sweep(swf);
    }
    if (*rd) {
      return cmd_render(rd_filter, rd_mics, rd_steering, rd_seed, rd_out, rd_format, rd_hop,
                        rd_headroom);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace bsm::cli
