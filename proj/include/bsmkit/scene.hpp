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

#pragma once

// Narrowband scene synthesis, binaural rendering and head rotation.

#include <cstdint>
#include <string>
#include <vector>

#include "bsmkit/core.hpp"
#include "bsmkit/design.hpp"

namespace bsm {

struct SourceSpec {
  /// Index into the dataset grid.
  std::size_t direction = 0;
  SourceDistance distance = SourceDistance::plane_wave();
  /// One complex amplitude per frequency bin.
  Eigen::VectorXcd spectrum;
};

struct SourceSet {
  std::vector<SourceSpec> sources;
};

/// Microphone spectra, one M-vector per bin.
using MicSpectra = std::vector<Eigen::VectorXcd>;

/// x(f) = sum_q v_q(f) s_q(f) + n(f); n is circular complex Gaussian with
/// variance sigma_n^2 per microphone and bin. Deterministic for a given seed.
MicSpectra synthesize_mic_signals(const SteeringSet& v, const SourceSet& sources,
                                  const NoiseModel& noise, std::uint64_t seed);

/// p(f) = h(f)^T s(f) per ear.
BinauralSpectrum ground_truth_binaural(const HrtfSet& h, const SourceSet& sources);

/// p_hat(f) = c(f)^H x(f) per ear.
BinauralSpectrum apply_filter(const BsmFilterBank& c, const MicSpectra& x);

struct RotatedHrtf {
  HrtfSet hrtf;
  /// Grid node read for each output direction.
  std::vector<std::size_t> source_index;
  /// Angle between the requested and the used direction, radians.
  std::vector<double> residual;
};

/// Entry q becomes the input entry nearest to (theta_q, phi_q + delta_phi).
RotatedHrtf rotate_hrtf(const HrtfSet& h, double delta_phi);

struct FrameParams {
  std::size_t frame = 4096;
  std::size_t hop = 2048;
};

/// Output delay of render_time_domain relative to its input, in samples.
inline constexpr std::size_t kRenderLatency = 0;

/// Short-time rendering with square-root Hann analysis and synthesis windows:
/// each frame is transformed, weighted per bin by c^H and overlap-added.
/// `mics` holds M equal-length channels. The frame length must equal the
/// filter's FFT size; throws kBadFrameConfig when the windows do not overlap
/// to a constant.
BinauralTime render_time_domain(const BsmFilterBank& c,
                                const std::vector<std::vector<double>>& mics,
                                const FrameParams& params = {});

// --- WAV --------------------------------------------------------------------

enum class WavFormat { kPcm16, kPcm24, kFloat32 };
WavFormat wav_format_from_string(const std::string& s);

struct WavData {
  int sample_rate = 48000;
  /// channels[c][n], nominal range [-1, 1].
  std::vector<std::vector<double>> channels;
};

WavData read_wav(const std::string& path);
void write_wav(const std::string& path, const WavData& data, WavFormat format);

}  // namespace bsm
