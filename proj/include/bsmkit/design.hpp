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

// Binaural signal matching filter design. For every bin and ear the filter c
// (M complex weights) renders p_hat = c^H x from the microphone signals x.

#include <optional>
#include <utility>
#include <vector>

#include "bsmkit/core.hpp"

namespace bsm {

enum class Criterion { kLs, kMagLs, kMixed };
const char* to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

/// How the mixed design turns its two constituent filters into the one that
/// is rendered. kBlend interpolates with alpha(f); kSwitch picks LS where
/// alpha >= 0.5 and MagLS otherwise.
enum class MixMode { kBlend, kSwitch };
const char* to_string(MixMode m);
MixMode mix_mode_from_string(const std::string& s);

/// Crossfade between complex matching (below lo_hz) and magnitude matching
/// (above hi_hz).
struct AlphaSchedule {
  double lo_hz = 800.0;
  double hi_hz = 1500.0;

  void validate() const;
};

/// 1 below lo_hz, 0 above hi_hz, linear in between.
double alpha_weight(double f_hz, const AlphaSchedule& sched = {});

struct FovSpec {
  double az_halfwidth = deg2rad(45.0);
  double el_halfwidth = deg2rad(45.0);
  Direction center{kPi / 2.0, 0.0};
  /// Weight of directions outside the field of view, in [0, 1).
  double beta = 0.2;

  void validate() const;
  bool contains(const Direction& d) const;
};

struct MaglsOptions {
  int max_iter = 100;
  double rel_tol = 1e-6;
  /// Keep the per-iteration magnitude error of every bin (diagnostics).
  bool record_history = false;
};

/// Per-ear, per-bin status of the magnitude solver.
struct MaglsDiagnostics {
  /// [ear][bin]; bins below the cutoff report 0 iterations.
  std::vector<std::vector<int>> iterations;
  std::vector<std::vector<bool>> converged;
  /// [ear][bin][iterate], only with MaglsOptions::record_history.
  std::vector<std::vector<std::vector<double>>> history;
  std::size_t unconverged_bins = 0;
};

struct BsmFilterBank {
  std::shared_ptr<const FrequencyAxis> freq_axis;
  /// One M x 2 matrix per bin; column 0 is the left ear.
  std::vector<Eigen::MatrixXcd> weights;
  Criterion criterion = Criterion::kLs;
  MixMode mix_mode = MixMode::kBlend;
  NoiseModel noise;
  std::optional<FovSpec> fov;
  SourceDistance design_distance = SourceDistance::plane_wave();
  AlphaSchedule schedule;
  /// Constituent filters of a mixed design.
  std::optional<std::vector<Eigen::MatrixXcd>> ls_weights;
  std::optional<std::vector<Eigen::MatrixXcd>> magls_weights;
  MaglsDiagnostics magls_diagnostics;
  Provenance provenance;

  double magls_cutoff_hz() const { return schedule.lo_hz; }
  std::size_t num_freqs() const { return weights.size(); }
  std::size_t num_mics() const { return weights.empty() ? 0 : weights[0].rows(); }
  Eigen::VectorXcd ear(std::size_t f, Ear e) const { return weights[f].col(ear_index(e)); }

  /// Filter used by the complex (LS) error: the LS constituent when present.
  const std::vector<Eigen::MatrixXcd>& ls_component() const {
    return ls_weights ? *ls_weights : weights;
  }
  /// Filter used by the magnitude error: the MagLS constituent when present.
  const std::vector<Eigen::MatrixXcd>& magls_component() const {
    return magls_weights ? *magls_weights : weights;
  }
};

/// Solves (V V^H + lambda I) c = V t* for many targets t with one
/// factorization of the regularized Hermitian system.
class RegularizedSolver {
 public:
  /// Throws kSingularSystem when the regularized matrix is numerically
  /// singular.
  RegularizedSolver(const Eigen::MatrixXcd& steering, double lambda);

  Eigen::VectorXcd solve(const Eigen::VectorXcd& target) const;
  const Eigen::MatrixXcd& steering() const { return v_; }

 private:
  Eigen::MatrixXcd v_;
  Eigen::LDLT<Eigen::MatrixXcd> ldlt_;
};

/// Magnitude error of one bin: || |V^T c*| - |h| ||^2 / || h ||^2.
double magnitude_error(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& c,
                       const Eigen::VectorXcd& h);

BsmFilterBank design_ls(const SteeringSet& v, const HrtfSet& h, const NoiseModel& noise);

BsmFilterBank design_magls(const SteeringSet& v, const HrtfSet& h, const NoiseModel& noise,
                           const AlphaSchedule& sched = {}, const MaglsOptions& opts = {});

BsmFilterBank design_mixed(const SteeringSet& v, const HrtfSet& h, const NoiseModel& noise,
                           const AlphaSchedule& sched = {}, MixMode mode = MixMode::kBlend,
                           const MaglsOptions& opts = {});

/// 1 inside the field of view, beta outside; boundary inclusive.
Eigen::VectorXd fov_weights(const DirectionGrid& grid, const FovSpec& fov);

/// Scales steering column q and HRTF entry q by the FoV weight of direction q.
std::pair<SteeringSet, HrtfSet> apply_fov(const SteeringSet& v, const HrtfSet& h,
                                          const FovSpec& fov);

struct DesignOptions {
  Criterion criterion = Criterion::kMixed;
  NoiseModel noise = NoiseModel::from_snr_db(20.0);
  AlphaSchedule schedule;
  MixMode mix_mode = MixMode::kBlend;
  std::optional<FovSpec> fov;
  MaglsOptions magls;
};

/// Applies the optional FoV weighting, runs the chosen criterion and records
/// the design metadata on the result.
BsmFilterBank design(const SteeringSet& v, const HrtfSet& h, const DesignOptions& opts);

}  // namespace bsm
