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

// Evaluation measures for a designed filter bank: normalized complex,
// magnitude and mixed errors, auditory-band ILD, group-delay ITD and the
// null-space projection of the HRTF onto the steering matrix.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsmkit/core.hpp"
#include "bsmkit/design.hpp"

namespace bsm {

/// Subset of grid directions; empty means every direction.
using DirectionSubset = std::span<const std::size_t>;

// --- Normalized errors -------------------------------------------------------

/// [s2 ||V^T c* - h||^2 + n2 ||c||^2] / (s2 ||h||^2) for one bin.
/// Throws kZeroReference when h is zero.
double eps_ls_bin(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& c, const Eigen::VectorXcd& h,
                  const NoiseModel& noise);

/// || |V^T c*| - |h| ||^2 / || h ||^2 for one bin.
double eps_magls_bin(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& c,
                     const Eigen::VectorXcd& h);

/// Per-bin complex error using the LS constituent of `c`. Bins whose
/// reference is zero are nullopt.
std::vector<std::optional<double>> eps_ls(const SteeringSet& v, const BsmFilterBank& c,
                                          const HrtfSet& h, const NoiseModel& noise, Ear ear,
                                          DirectionSubset subset = {});

/// Per-bin magnitude error using the MagLS constituent of `c`.
std::vector<std::optional<double>> eps_magls(const SteeringSet& v, const BsmFilterBank& c,
                                             const HrtfSet& h, Ear ear,
                                             DirectionSubset subset = {});

/// alpha(f) * eps_ls + (1 - alpha(f)) * eps_magls.
double eps_mixed(double eps_ls_value, double eps_magls_value, double f_hz,
                 const AlphaSchedule& sched = {});

// --- ILD ----------------------------------------------------------------------

/// Gammatone magnitude responses on the FFT bins of a frequency axis.
struct ErbFilterbank {
  int n_bands = 32;
  double f_lo = 1500.0;
  double f_hi = 20000.0;
  double sample_rate = 0.0;
  /// Ascending centre frequencies, Hz.
  std::vector<double> centers;
  /// n_bands x F magnitude responses.
  Eigen::MatrixXd response;
  /// f_hi was reduced to the Nyquist frequency.
  bool clamped = false;
};

/// Glasberg-Moore bandwidth with the Auditory Toolbox constants.
double erb_bandwidth(double f_hz);
/// ln(1 + f / (EarQ * minBW)): centres are uniformly spaced on this scale.
double erb_rate(double f_hz);

/// 4th-order gammatone magnitudes |G(f)| = (1 + ((f - fc) / b)^2)^-2 with
/// b = 1.019 ERB(fc), peak 1 at fc.
ErbFilterbank make_erb_filterbank(const FrequencyAxis& axis, int n_bands = 32,
                                  double f_lo = 1500.0, double f_hi = 20000.0);

struct IldResult {
  /// dB per band; skipped bands hold 0.
  std::vector<double> per_band;
  /// Sum over bands divided by n_bands.
  double average = 0.0;
  /// Bands with zero energy in either channel.
  std::vector<bool> silent;
  std::size_t silent_count = 0;
};

IldResult ild(std::span<const cplx> p_left, std::span<const cplx> p_right,
              const ErbFilterbank& bank);

struct SpectrumPair {
  std::span<const cplx> left;
  std::span<const cplx> right;
};

/// Mean over bands of |ILD_rep - ILD_ref|; bands silent in either pair count
/// as zero with the fixed n_bands divisor.
double ild_error(const SpectrumPair& ref, const SpectrumPair& rep, const ErbFilterbank& bank);

// --- ITD ----------------------------------------------------------------------

struct SignalPair {
  std::span<const double> left;
  std::span<const double> right;
};

/// Mean over bins in (0, f_max] of tau_l - tau_r, with the group delay
/// tau = Re[DFT{n p(n)} / DFT{p(n)}] / fs and zero-based n. Bins whose
/// magnitude falls below 1e-12 of the channel peak are skipped. Throws
/// kAllBinsExcluded when nothing remains.
double itd(std::span<const double> left, std::span<const double> right, double sample_rate,
           double f_max = 1500.0);

double itd_error(const SignalPair& ref, const SignalPair& rep, double sample_rate,
                 double f_max = 1500.0);

// --- Null-space projection ---------------------------------------------------

/// Energy fraction (dB) of h outside the span of the singular directions of
/// V^T whose singular value is within `threshold_db` of the largest. Floors
/// at -300 dB.
class NullSpaceProjector {
 public:
  NullSpaceProjector(const Eigen::MatrixXcd& v, double threshold_db = -20.0);

  double project_db(const Eigen::VectorXcd& h) const;
  Eigen::Index retained_rank() const { return basis_.cols(); }
  /// Orthonormal basis of the retained column space of V^T (Q x rank).
  const Eigen::MatrixXcd& basis() const { return basis_; }

 private:
  Eigen::MatrixXcd basis_;
};

inline constexpr double kNullFloorDb = -300.0;

/// Just-noticeable differences quoted next to ILD/ITD errors. Where frontal
/// ends and lateral begins is left to the reader.
inline constexpr double kIldJndDb = 1.0;
inline constexpr double kItdJndFrontalS = 20e-6;
inline constexpr double kItdJndLateralS = 100e-6;

double null_space_projection(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& h,
                             double threshold_db = -20.0);

// --- Report ------------------------------------------------------------------

enum class RegionTag { kAll, kInFov, kOutFov };
const char* to_string(RegionTag t);
RegionTag region_from_string(const std::string& s);

struct FrequencyRow {
  double f_hz = 0.0;
  std::array<std::optional<double>, 2> eps_ls;
  std::array<std::optional<double>, 2> eps_magls;
  std::array<std::optional<double>, 2> eps_mix;
  std::array<std::optional<double>, 2> xi_null;
};

struct DirectionRow {
  double az_deg = 0.0;
  double el_deg = 0.0;
  /// "ild_db" or "itd_s".
  std::string metric;
  double ref = 0.0;
  double rep = 0.0;
  double abs_err = 0.0;
  RegionTag region = RegionTag::kAll;
};

struct MetricsReport {
  std::vector<FrequencyRow> frequency_rows;
  std::vector<DirectionRow> direction_rows;
  Provenance provenance;
};

struct EvaluateOptions {
  /// Defaults to the noise model the filter was designed with.
  std::optional<NoiseModel> noise;
  RegionTag region = RegionTag::kAll;
  /// Region membership; defaults to the filter's FoV, then to +-45 deg.
  std::optional<FovSpec> fov;
  double null_threshold_db = -20.0;
  double itd_f_max = 1500.0;
  int erb_bands = 32;
  double erb_lo = 1500.0;
  double erb_hi = 20000.0;
  bool per_direction = true;
};

/// Directions of `grid` belonging to `region`.
std::vector<std::size_t> region_indices(const DirectionGrid& grid, RegionTag region,
                                        const FovSpec& fov);

/// Full report for a filter evaluated on a steering/HRTF pair.
MetricsReport evaluate(const BsmFilterBank& c, const SteeringSet& v, const HrtfSet& h,
                       const EvaluateOptions& opts = {});

struct ReportSummary {
  std::array<std::optional<double>, 2> eps_mix_avg;
  std::array<std::optional<double>, 2> eps_ls_avg;
  std::array<std::optional<double>, 2> eps_magls_avg;
  std::optional<double> ild_err_avg;
  std::optional<double> itd_err_avg;
};

/// Frequency averages over [lo_hz, hi_hz] and direction averages.
ReportSummary summarize(const MetricsReport& r, double lo_hz = 75.0, double hi_hz = 10000.0);

}  // namespace bsm
