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

#include "bsmkit/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "bsmkit/dsp.hpp"
#include "bsmkit/parallel.hpp"

namespace bsm {

namespace {

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Auditory Toolbox (Slaney) constants.
constexpr double kEarQ = 9.26449;
constexpr double kMinBw = 24.7;

std::vector<int> to_index(DirectionSubset subset) {
  return std::vector<int>(subset.begin(), subset.end());
}

Eigen::MatrixXcd select_cols(const Eigen::MatrixXcd& m, DirectionSubset subset) {
  if (subset.empty()) return m;
  return m(Eigen::all, to_index(subset));
}

Eigen::VectorXcd select_rows(const Eigen::VectorXcd& v, DirectionSubset subset) {
  if (subset.empty()) return v;
  return v(to_index(subset));
}

void check_eval_inputs(const SteeringSet& v, const BsmFilterBank& c, const HrtfSet& h) {
  require_compatible(v, h);
  if (!c.freq_axis || !c.freq_axis->same_as(*v.freq_axis) || c.num_freqs() != v.num_freqs()) {
    throw Error(ErrorCode::kIncompatible, "filter and dataset frequency axes differ");
  }
  if (c.num_mics() != v.num_mics()) {
    throw Error(ErrorCode::kIncompatible, "filter and steering microphone counts differ");
  }
}

}  // namespace

double eps_ls_bin(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& c, const Eigen::VectorXcd& h,
                  const NoiseModel& noise) {
  const double ref = h.squaredNorm();
  if (!(ref > 0.0)) throw Error(ErrorCode::kZeroReference, "reference HRTF is zero");
  const Eigen::VectorXcd cc = c.conjugate();
  const double mismatch = (v.transpose() * cc - h).squaredNorm();
  return (noise.sigma_s_sq * mismatch + noise.sigma_n_sq * cc.squaredNorm()) /
         (noise.sigma_s_sq * ref);
}

double eps_magls_bin(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& c,
                     const Eigen::VectorXcd& h) {
  return magnitude_error(v, c, h);
}

std::vector<std::optional<double>> eps_ls(const SteeringSet& v, const BsmFilterBank& c,
                                          const HrtfSet& h, const NoiseModel& noise, Ear ear,
                                          DirectionSubset subset) {
  check_eval_inputs(v, c, h);
  const auto& w = c.ls_component();
  std::vector<std::optional<double>> out(v.num_freqs());
  for (std::size_t f = 0; f < v.num_freqs(); ++f) {
    const Eigen::VectorXcd hv = select_rows(h.ear(f, ear), subset);
    if (!(hv.squaredNorm() > 0.0)) continue;
    out[f] = eps_ls_bin(select_cols(v.data[f], subset), w[f].col(ear_index(ear)), hv, noise);
  }
  return out;
}

std::vector<std::optional<double>> eps_magls(const SteeringSet& v, const BsmFilterBank& c,
                                             const HrtfSet& h, Ear ear, DirectionSubset subset) {
  check_eval_inputs(v, c, h);
  const auto& w = c.magls_component();
  std::vector<std::optional<double>> out(v.num_freqs());
  for (std::size_t f = 0; f < v.num_freqs(); ++f) {
    const Eigen::VectorXcd hv = select_rows(h.ear(f, ear), subset);
    if (!(hv.squaredNorm() > 0.0)) continue;
    out[f] = eps_magls_bin(select_cols(v.data[f], subset), w[f].col(ear_index(ear)), hv);
  }
  return out;
}

double eps_mixed(double eps_ls_value, double eps_magls_value, double f_hz,
                 const AlphaSchedule& sched) {
  const double a = alpha_weight(f_hz, sched);
  if (a == 1.0) return eps_ls_value;
  if (a == 0.0) return eps_magls_value;
  return a * eps_ls_value + (1.0 - a) * eps_magls_value;
}

// --- ERB filterbank ----------------------------------------------------------

double erb_bandwidth(double f_hz) { return f_hz / kEarQ + kMinBw; }

double erb_rate(double f_hz) { return std::log1p(f_hz / (kEarQ * kMinBw)); }

ErbFilterbank make_erb_filterbank(const FrequencyAxis& axis, int n_bands, double f_lo,
                                  double f_hi) {
  if (n_bands < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one ERB band");
  ErbFilterbank bank;
  bank.n_bands = n_bands;
  bank.sample_rate = axis.sample_rate();
  if (f_hi > axis.nyquist()) {
    f_hi = axis.nyquist();
    bank.clamped = true;
  }
  if (!(f_lo > 0.0) || !(f_lo < f_hi)) {
    throw Error(ErrorCode::kInvalidArgument, "ERB range needs 0 < f_lo < f_hi <= Nyquist");
  }
  bank.f_lo = f_lo;
  bank.f_hi = f_hi;
  // ERBSpace: uniform steps in log(f + EarQ*minBW), from just below f_hi
  // down to f_lo; stored ascending.
  const double offset = kEarQ * kMinBw;
  const double step = (std::log(f_lo + offset) - std::log(f_hi + offset)) / n_bands;
  bank.centers.resize(static_cast<std::size_t>(n_bands));
  for (int i = 1; i <= n_bands; ++i) {
    bank.centers[static_cast<std::size_t>(n_bands - i)] =
        -offset + std::exp(i * step) * (f_hi + offset);
  }
  bank.response.resize(n_bands, static_cast<Eigen::Index>(axis.size()));
  for (int b = 0; b < n_bands; ++b) {
    const double fc = bank.centers[static_cast<std::size_t>(b)];
    const double bw = 1.019 * erb_bandwidth(fc);
    for (std::size_t f = 0; f < axis.size(); ++f) {
      const double x = (axis.frequency(f) - fc) / bw;
      bank.response(b, static_cast<Eigen::Index>(f)) = 1.0 / ((1.0 + x * x) * (1.0 + x * x));
    }
  }
  return bank;
}

IldResult ild(std::span<const cplx> p_left, std::span<const cplx> p_right,
              const ErbFilterbank& bank) {
  const auto nf = static_cast<std::size_t>(bank.response.cols());
  if (p_left.size() != nf || p_right.size() != nf) {
    throw Error(ErrorCode::kDimsMismatch, "spectra do not match the ERB filterbank bins");
  }
  IldResult r;
  r.per_band.assign(static_cast<std::size_t>(bank.n_bands), 0.0);
  r.silent.assign(static_cast<std::size_t>(bank.n_bands), false);
  for (int b = 0; b < bank.n_bands; ++b) {
    double el = 0.0;
    double er = 0.0;
    for (std::size_t f = 0; f < nf; ++f) {
      const double g = bank.response(b, static_cast<Eigen::Index>(f));
      el += g * g * std::norm(p_left[f]);
      er += g * g * std::norm(p_right[f]);
    }
    const auto bi = static_cast<std::size_t>(b);
    if (!(el > 0.0) || !(er > 0.0)) {
      r.silent[bi] = true;
      ++r.silent_count;
      continue;
    }
    r.per_band[bi] = 10.0 * std::log10(el / er);
  }
  r.average = std::accumulate(r.per_band.begin(), r.per_band.end(), 0.0) / bank.n_bands;
  return r;
}

double ild_error(const SpectrumPair& ref, const SpectrumPair& rep, const ErbFilterbank& bank) {
  const IldResult a = ild(ref.left, ref.right, bank);
  const IldResult b = ild(rep.left, rep.right, bank);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.per_band.size(); ++i) {
    if (a.silent[i] || b.silent[i]) continue;
    sum += std::abs(b.per_band[i] - a.per_band[i]);
  }
  return sum / bank.n_bands;
}

// --- ITD -----------------------------------------------------------------------

namespace {

struct GroupDelay {
  std::vector<cplx> spectrum;
  std::vector<cplx> ramp_spectrum;
  double peak = 0.0;
};

GroupDelay group_delay_terms(std::span<const double> p) {
  GroupDelay g;
  std::vector<double> ramp(p.size());
  for (std::size_t n = 0; n < p.size(); ++n) ramp[n] = static_cast<double>(n) * p[n];
  g.spectrum = dsp::rfft(p);
  g.ramp_spectrum = dsp::rfft(ramp);
  for (const auto& s : g.spectrum) g.peak = std::max(g.peak, std::abs(s));
  return g;
}

}  // namespace

double itd(std::span<const double> left, std::span<const double> right, double sample_rate,
           double f_max) {
  if (left.size() != right.size()) {
    throw Error(ErrorCode::kDimsMismatch, "ITD needs equal-length signals");
  }
  if (left.size() < 2) throw Error(ErrorCode::kInvalidArgument, "ITD needs at least 2 samples");
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bad sample rate");
  const GroupDelay l = group_delay_terms(left);
  const GroupDelay r = group_delay_terms(right);
  const double n = static_cast<double>(left.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 1; k < l.spectrum.size(); ++k) {
    if (static_cast<double>(k) * sample_rate / n > f_max) break;
    if (std::abs(l.spectrum[k]) < 1e-12 * l.peak || std::abs(r.spectrum[k]) < 1e-12 * r.peak ||
        l.peak == 0.0 || r.peak == 0.0) {
      continue;
    }
    const double tau_l = (l.ramp_spectrum[k] / l.spectrum[k]).real() / sample_rate;
    const double tau_r = (r.ramp_spectrum[k] / r.spectrum[k]).real() / sample_rate;
    sum += tau_l - tau_r;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kAllBinsExcluded, "no usable bin below f_max");
  return sum / static_cast<double>(count);
}

double itd_error(const SignalPair& ref, const SignalPair& rep, double sample_rate,
                 double f_max) {
  return std::abs(itd(ref.left, ref.right, sample_rate, f_max) -
                  itd(rep.left, rep.right, sample_rate, f_max));
}

// --- Null space ------------------------------------------------------------------

NullSpaceProjector::NullSpaceProjector(const Eigen::MatrixXcd& v, double threshold_db) {
  const Eigen::MatrixXcd vt = v.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vt, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::Index rank = 0;
  if (s.size() > 0 && s[0] > 0.0) {
    const double cut = s[0] * std::pow(10.0, threshold_db / 20.0);
    while (rank < s.size() && s[rank] >= cut) ++rank;
  }
  basis_ = svd.matrixU().leftCols(rank);
}

double NullSpaceProjector::project_db(const Eigen::VectorXcd& h) const {
  const double ref = h.squaredNorm();
  if (!(ref > 0.0)) throw Error(ErrorCode::kZeroReference, "reference HRTF is zero");
  const Eigen::VectorXcd residual = h - basis_ * (basis_.adjoint() * h);
  const double frac = residual.squaredNorm() / ref;
  if (!(frac > 0.0)) return kNullFloorDb;
  return std::max(kNullFloorDb, 10.0 * std::log10(frac));
}

double null_space_projection(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& h,
                             double threshold_db) {
  return NullSpaceProjector(v, threshold_db).project_db(h);
}

// --- Report ---------------------------------------------------------------------

const char* to_string(RegionTag t) {
  switch (t) {
    case RegionTag::kAll: return "all";
    case RegionTag::kInFov: return "in-fov";
    case RegionTag::kOutFov: return "out-fov";
  }
  return "?";
}

RegionTag region_from_string(const std::string& s) {
  if (s == "all") return RegionTag::kAll;
  if (s == "in-fov") return RegionTag::kInFov;
  if (s == "out-fov") return RegionTag::kOutFov;
  throw Error(ErrorCode::kInvalidArgument, "unknown region '" + s + "'");
}

std::vector<std::size_t> region_indices(const DirectionGrid& grid, RegionTag region,
                                        const FovSpec& fov) {
  std::vector<std::size_t> idx;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const bool inside = fov.contains(grid[q]);
    if (region == RegionTag::kAll || (region == RegionTag::kInFov) == inside) idx.push_back(q);
  }
  return idx;
}

MetricsReport evaluate(const BsmFilterBank& c, const SteeringSet& v, const HrtfSet& h,
                       const EvaluateOptions& opts) {
  check_eval_inputs(v, c, h);
  const NoiseModel noise = opts.noise.value_or(c.noise);
  const FovSpec fov = opts.fov ? *opts.fov : c.fov.value_or(FovSpec{});
  const std::vector<std::size_t> idx = region_indices(*v.grid, opts.region, fov);
  if (idx.empty()) throw Error(ErrorCode::kInvalidArgument, "region contains no directions");
  const DirectionSubset subset(idx);
  const FrequencyAxis& axis = *v.freq_axis;
  const std::size_t nf = v.num_freqs();

  MetricsReport report;
  report.frequency_rows.resize(nf);
  const auto& w_ls = c.ls_component();
  const auto& w_mag = c.magls_component();
  parallel_for(nf, [&](std::size_t f) {
    FrequencyRow& row = report.frequency_rows[f];
    row.f_hz = axis.frequency(f);
    const Eigen::MatrixXcd vs = select_cols(v.data[f], subset);
    const NullSpaceProjector proj(vs, opts.null_threshold_db);
    for (Ear e : kEars) {
      const int ei = ear_index(e);
      const Eigen::VectorXcd hv = select_rows(h.ear(f, e), subset);
      if (!(hv.squaredNorm() > 0.0)) continue;
      row.eps_ls[ei] = eps_ls_bin(vs, w_ls[f].col(ei), hv, noise);
      row.eps_magls[ei] = eps_magls_bin(vs, w_mag[f].col(ei), hv);
      row.eps_mix[ei] = eps_mixed(*row.eps_ls[ei], *row.eps_magls[ei], row.f_hz, c.schedule);
      row.xi_null[ei] = proj.project_db(hv);
    }
  });

  report.provenance["region"] = to_string(opts.region);
  report.provenance["noise_sigma_s_sq"] = format_number(noise.sigma_s_sq);
  report.provenance["noise_sigma_n_sq"] = format_number(noise.sigma_n_sq);
  report.provenance["directions"] = std::to_string(idx.size());
  if (!opts.per_direction) return report;

  // Rendered response of every direction for a unit source: c^H v_q.
  std::vector<Eigen::MatrixXcd> rendered(nf);
  for (std::size_t f = 0; f < nf; ++f) rendered[f] = c.weights[f].adjoint() * v.data[f];

  const ErbFilterbank bank = make_erb_filterbank(axis, opts.erb_bands, opts.erb_lo, opts.erb_hi);
  const std::size_t nfft = axis.fft_size();
  struct DirResult {
    DirectionRow ild_row, itd_row;
    bool itd_ok = false;
  };
  std::vector<DirResult> per_dir(idx.size());
  parallel_for(idx.size(), [&](std::size_t i) {
    const std::size_t q = idx[i];
    const auto qi = static_cast<Eigen::Index>(q);
    std::vector<cplx> ref_l(nf), ref_r(nf), rep_l(nf), rep_r(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      ref_l[f] = h.data[f](0, qi);
      ref_r[f] = h.data[f](1, qi);
      rep_l[f] = rendered[f](0, qi);
      rep_r[f] = rendered[f](1, qi);
    }
    DirResult& d = per_dir[i];
    const Direction& dir = (*v.grid)[q];
    DirectionRow base;
    base.az_deg = dir.azimuth_deg();
    base.el_deg = dir.elevation_deg();
    base.region = opts.region;

    d.ild_row = base;
    d.ild_row.metric = "ild_db";
    d.ild_row.ref = ild(ref_l, ref_r, bank).average;
    d.ild_row.rep = ild(rep_l, rep_r, bank).average;
    d.ild_row.abs_err = ild_error({ref_l, ref_r}, {rep_l, rep_r}, bank);

    const auto tl = dsp::irfft(ref_l, nfft);
    const auto tr = dsp::irfft(ref_r, nfft);
    const auto sl = dsp::irfft(rep_l, nfft);
    const auto sr = dsp::irfft(rep_r, nfft);
    try {
      d.itd_row = base;
      d.itd_row.metric = "itd_s";
      d.itd_row.ref = itd(tl, tr, axis.sample_rate(), opts.itd_f_max);
      d.itd_row.rep = itd(sl, sr, axis.sample_rate(), opts.itd_f_max);
      d.itd_row.abs_err = std::abs(d.itd_row.ref - d.itd_row.rep);
      d.itd_ok = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAllBinsExcluded) throw;
    }
  });
  std::size_t itd_skipped = 0;
  for (auto& d : per_dir) report.direction_rows.push_back(std::move(d.ild_row));
  for (auto& d : per_dir) {
    if (d.itd_ok) {
      report.direction_rows.push_back(std::move(d.itd_row));
    } else {
      ++itd_skipped;
    }
  }
  report.provenance["itd_skipped_directions"] = std::to_string(itd_skipped);
  report.provenance["erb_clamped"] = bank.clamped ? "true" : "false";
  report.provenance["ild_jnd_db"] = format_number(kIldJndDb);
  report.provenance["itd_jnd_frontal_s"] = format_number(kItdJndFrontalS);
  report.provenance["itd_jnd_lateral_s"] = format_number(kItdJndLateralS);
  return report;
}

ReportSummary summarize(const MetricsReport& r, double lo_hz, double hi_hz) {
  ReportSummary s;
  auto average = [&](auto member, int ear) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : r.frequency_rows) {
      if (row.f_hz < lo_hz || row.f_hz > hi_hz) continue;
      const auto& val = (row.*member)[static_cast<std::size_t>(ear)];
      if (!val) continue;
      sum += *val;
      ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  for (int e = 0; e < 2; ++e) {
    s.eps_mix_avg[static_cast<std::size_t>(e)] = average(&FrequencyRow::eps_mix, e);
    s.eps_ls_avg[static_cast<std::size_t>(e)] = average(&FrequencyRow::eps_ls, e);
    s.eps_magls_avg[static_cast<std::size_t>(e)] = average(&FrequencyRow::eps_magls, e);
  }
  auto dir_average = [&](const std::string& metric) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : r.direction_rows) {
      if (row.metric != metric) continue;
      sum += row.abs_err;
      ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  s.ild_err_avg = dir_average("ild_db");
  s.itd_err_avg = dir_average("itd_s");
  return s;
}

}  // namespace bsm
