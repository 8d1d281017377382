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

#include "bsmkit/scene.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "bsmkit/dsp.hpp"
#include "bsmkit/parallel.hpp"

namespace bsm {

namespace {

void check_sources(std::size_t num_dirs, std::size_t num_freqs, const SourceDistance& dataset,
                   const SourceSet& sources) {
  for (const auto& s : sources.sources) {
    if (s.direction >= num_dirs) {
      throw Error(ErrorCode::kInvalidArgument, "source direction index out of range");
    }
    if (static_cast<std::size_t>(s.spectrum.size()) != num_freqs) {
      throw Error(ErrorCode::kDimsMismatch, "source spectrum length differs from bin count");
    }
    const bool same = s.distance.is_plane_wave() == dataset.is_plane_wave() &&
                      (dataset.is_plane_wave() ||
                       std::abs(s.distance.value() - dataset.value()) <= 1e-9);
    if (!same) {
      throw Error(ErrorCode::kIncompatible, "source distance " + s.distance.to_string() +
                                                " differs from dataset distance " +
                                                dataset.to_string());
    }
  }
}

}  // namespace

MicSpectra synthesize_mic_signals(const SteeringSet& v, const SourceSet& sources,
                                  const NoiseModel& noise, std::uint64_t seed) {
  check_sources(v.num_dirs(), v.num_freqs(), v.source_distance, sources);
  MicSpectra x(v.num_freqs(), Eigen::VectorXcd::Zero(v.num_mics()));
  for (std::size_t f = 0; f < v.num_freqs(); ++f) {
    for (const auto& s : sources.sources) {
      x[f] += v.data[f].col(static_cast<Eigen::Index>(s.direction)) * s.spectrum[f];
    }
  }
  if (noise.sigma_n_sq > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise.sigma_n_sq / 2.0));
    for (auto& xf : x) {
      for (Eigen::Index m = 0; m < xf.size(); ++m) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        xf[m] += cplx(re, im);
      }
    }
  }
  return x;
}

BinauralSpectrum ground_truth_binaural(const HrtfSet& h, const SourceSet& sources) {
  check_sources(h.num_dirs(), h.num_freqs(), h.source_distance, sources);
  BinauralSpectrum p{Eigen::VectorXcd::Zero(h.num_freqs()), Eigen::VectorXcd::Zero(h.num_freqs())};
  for (std::size_t f = 0; f < h.num_freqs(); ++f) {
    const auto fi = static_cast<Eigen::Index>(f);
    for (const auto& s : sources.sources) {
      const auto q = static_cast<Eigen::Index>(s.direction);
      p.left[fi] += h.data[f](0, q) * s.spectrum[fi];
      p.right[fi] += h.data[f](1, q) * s.spectrum[fi];
    }
  }
  return p;
}

BinauralSpectrum apply_filter(const BsmFilterBank& c, const MicSpectra& x) {
  if (x.size() != c.num_freqs()) {
    throw Error(ErrorCode::kDimsMismatch, "mic spectra and filter bin counts differ");
  }
  const auto nf = static_cast<Eigen::Index>(x.size());
  BinauralSpectrum p{Eigen::VectorXcd(nf), Eigen::VectorXcd(nf)};
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto& w = c.weights[static_cast<std::size_t>(f)];
    if (x[static_cast<std::size_t>(f)].size() != w.rows()) {
      throw Error(ErrorCode::kDimsMismatch, "mic count differs from filter");
    }
    p.left[f] = w.col(0).dot(x[static_cast<std::size_t>(f)]);
    p.right[f] = w.col(1).dot(x[static_cast<std::size_t>(f)]);
  }
  return p;
}

RotatedHrtf rotate_hrtf(const HrtfSet& h, double delta_phi) {
  if (!h.grid) throw Error(ErrorCode::kInvalidArgument, "HRTF set has no grid");
  const DirectionGrid& grid = *h.grid;
  RotatedHrtf r;
  r.hrtf = h;
  r.source_index.resize(grid.size());
  r.residual.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t q) {
    const Direction target(grid[q].theta(), grid[q].phi() + delta_phi);
    const NearestDirection n = grid.nearest(target);
    r.source_index[q] = n.index;
    r.residual[q] = n.residual;
  });
  for (std::size_t f = 0; f < h.num_freqs(); ++f) {
    for (std::size_t q = 0; q < grid.size(); ++q) {
      r.hrtf.data[f].col(static_cast<Eigen::Index>(q)) =
          h.data[f].col(static_cast<Eigen::Index>(r.source_index[q]));
    }
  }
  std::ostringstream os;
  os.precision(17);
  os << delta_phi;
  r.hrtf.provenance["rotation_rad"] = os.str();
  return r;
}

BinauralTime render_time_domain(const BsmFilterBank& c,
                                const std::vector<std::vector<double>>& mics,
                                const FrameParams& params) {
  const std::size_t n = params.frame;
  const std::size_t hop = params.hop;
  if (!c.freq_axis || n != c.freq_axis->fft_size()) {
    throw Error(ErrorCode::kBadFrameConfig, "frame length must equal the filter FFT size");
  }
  if (hop == 0 || hop > n) throw Error(ErrorCode::kBadFrameConfig, "hop must lie in [1, frame]");
  if (mics.size() != c.num_mics()) {
    throw Error(ErrorCode::kDimsMismatch, "mic channel count differs from filter");
  }
  const std::vector<double> win = dsp::sqrt_hann(n);
  // Overlapped analysis*synthesis window must be constant.
  std::vector<double> overlap(hop, 0.0);
  for (std::size_t i = 0; i < n; ++i) overlap[i % hop] += win[i] * win[i];
  const double gain = overlap[0];
  for (double o : overlap) {
    if (!(gain > 0.0) || std::abs(o - gain) > 1e-9 * gain) {
      throw Error(ErrorCode::kBadFrameConfig, "windows do not overlap-add to a constant");
    }
  }

  const std::size_t len = mics.empty() ? 0 : mics[0].size();
  for (const auto& ch : mics) {
    if (ch.size() != len) throw Error(ErrorCode::kDimsMismatch, "mic channels differ in length");
  }
  BinauralTime out;
  out.sample_rate = c.freq_axis->sample_rate();
  out.left.assign(len, 0.0);
  out.right.assign(len, 0.0);
  if (len == 0) return out;

  // Frame j covers padded samples [j*hop, j*hop + n) with `lead` zeros in
  // front, so every output sample sees the full window overlap.
  const std::size_t lead = n - hop;
  const std::size_t frames = (len + lead + hop - 1) / hop;
  const std::size_t nb = n / 2 + 1;
  std::vector<std::vector<double>> frame_l(frames), frame_r(frames);
  parallel_for(frames, [&](std::size_t j) {
    std::vector<cplx> yl(nb, 0.0), yr(nb, 0.0);
    std::vector<double> seg(n);
    for (std::size_t m = 0; m < mics.size(); ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::ptrdiff_t t = static_cast<std::ptrdiff_t>(j * hop + i) -
                                 static_cast<std::ptrdiff_t>(lead);
        seg[i] = (t >= 0 && static_cast<std::size_t>(t) < len)
                     ? mics[m][static_cast<std::size_t>(t)] * win[i]
                     : 0.0;
      }
      const auto spec = dsp::rfft(seg);
      for (std::size_t k = 0; k < nb; ++k) {
        const auto& w = c.weights[k];
        yl[k] += std::conj(w(static_cast<Eigen::Index>(m), 0)) * spec[k];
        yr[k] += std::conj(w(static_cast<Eigen::Index>(m), 1)) * spec[k];
      }
    }
    frame_l[j] = dsp::irfft(yl, n);
    frame_r[j] = dsp::irfft(yr, n);
  });
  for (std::size_t j = 0; j < frames; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::ptrdiff_t t = static_cast<std::ptrdiff_t>(j * hop + i) -
                               static_cast<std::ptrdiff_t>(lead);
      if (t < 0 || static_cast<std::size_t>(t) >= len) continue;
      out.left[static_cast<std::size_t>(t)] += frame_l[j][i] * win[i] / gain;
      out.right[static_cast<std::size_t>(t)] += frame_r[j][i] * win[i] / gain;
    }
  }
  return out;
}

}  // namespace bsm
