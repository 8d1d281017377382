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

#include "bsmkit/design.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bsmkit/parallel.hpp"

namespace bsm {

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::kLs: return "ls";
    case Criterion::kMagLs: return "magls";
    case Criterion::kMixed: return "mixed";
  }
  return "?";
}

Criterion criterion_from_string(const std::string& s) {
  if (s == "ls") return Criterion::kLs;
  if (s == "magls") return Criterion::kMagLs;
  if (s == "mixed") return Criterion::kMixed;
  throw Error(ErrorCode::kInvalidArgument, "unknown criterion '" + s + "'");
}

const char* to_string(MixMode m) { return m == MixMode::kBlend ? "blend" : "switch"; }

MixMode mix_mode_from_string(const std::string& s) {
  if (s == "blend") return MixMode::kBlend;
  if (s == "switch") return MixMode::kSwitch;
  throw Error(ErrorCode::kInvalidArgument, "unknown mix mode '" + s + "'");
}

void AlphaSchedule::validate() const {
  if (!(lo_hz > 0.0) || !(hi_hz > lo_hz)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha schedule needs 0 < lo_hz < hi_hz");
  }
}

double alpha_weight(double f_hz, const AlphaSchedule& sched) {
  if (f_hz < sched.lo_hz) return 1.0;
  if (f_hz > sched.hi_hz) return 0.0;
  return (sched.hi_hz - f_hz) / (sched.hi_hz - sched.lo_hz);
}

void FovSpec::validate() const {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "FoV beta must lie in [0, 1)");
  }
  auto ok = [](double w) { return w > 0.0 && w <= kPi; };
  if (!ok(az_halfwidth) || !ok(el_halfwidth)) {
    throw Error(ErrorCode::kInvalidArgument, "FoV half-widths must lie in (0, pi]");
  }
}

bool FovSpec::contains(const Direction& d) const {
  constexpr double kSlack = 1e-12;
  const double daz = std::abs(wrap_signed(d.phi() - center.phi()));
  const double del = std::abs(d.theta() - center.theta());
  return daz <= az_halfwidth + kSlack && del <= el_halfwidth + kSlack;
}

// --- RegularizedSolver ------------------------------------------------------

RegularizedSolver::RegularizedSolver(const Eigen::MatrixXcd& steering, double lambda)
    : v_(steering) {
  const Eigen::Index m = v_.rows();
  Eigen::MatrixXcd a = v_ * v_.adjoint();
  a.diagonal().array() += lambda;
  ldlt_.compute(a);
  const double scale = a.cwiseAbs().maxCoeff();
  if (ldlt_.info() != Eigen::Success || !(scale > 0.0) || ldlt_.rcond() < 1e-13) {
    std::ostringstream os;
    os << "regularized " << m << "x" << m << " system is singular (lambda=" << lambda << ")";
    throw Error(ErrorCode::kSingularSystem, os.str());
  }
}

Eigen::VectorXcd RegularizedSolver::solve(const Eigen::VectorXcd& target) const {
  return ldlt_.solve(v_ * target.conjugate());
}

namespace {

// Unnormalized magnitude mismatch || |V^T c*| - |h| ||^2.
double magnitude_residual(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& c,
                          const Eigen::VectorXd& abs_h) {
  const Eigen::VectorXcd y = v.transpose() * c.conjugate();
  return (y.cwiseAbs() - abs_h).squaredNorm();
}

Eigen::VectorXcd phase_target(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& c,
                              const Eigen::VectorXd& abs_h) {
  const Eigen::VectorXcd y = v.transpose() * c.conjugate();
  Eigen::VectorXcd t(abs_h.size());
  for (Eigen::Index q = 0; q < t.size(); ++q) {
    const double a = std::abs(y[q]);
    t[q] = a > 0.0 ? abs_h[q] * (y[q] / a) : cplx(abs_h[q], 0.0);
  }
  return t;
}

void check_design_inputs(const SteeringSet& v, const HrtfSet& h) {
  require_compatible(v, h);
  if (v.num_freqs() == 0 || v.num_mics() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty steering set");
  }
}

BsmFilterBank empty_bank(const SteeringSet& v, const NoiseModel& noise, Criterion crit) {
  BsmFilterBank bank;
  bank.freq_axis = v.freq_axis;
  bank.weights.assign(v.num_freqs(), Eigen::MatrixXcd::Zero(v.num_mics(), 2));
  bank.criterion = crit;
  bank.noise = noise;
  bank.design_distance = v.source_distance;
  return bank;
}

struct MaglsEarResult {
  std::vector<Eigen::VectorXcd> filters;
  std::vector<int> iterations;
  std::vector<bool> converged;
  std::vector<std::vector<double>> history;
};

// Sequential in frequency: each bin above the cutoff starts from the better
// (by magnitude error) of its LS solution and the solution whose target
// carries the previous bin's output phases, then alternates phase
// assignment and regularized solve. A step that would raise the magnitude
// error is rejected, which ends the bin.
MaglsEarResult magls_one_ear(const SteeringSet& v, const HrtfSet& h, Ear ear, double lambda,
                             const AlphaSchedule& sched, const MaglsOptions& opts) {
  const std::size_t nf = v.num_freqs();
  MaglsEarResult r;
  r.filters.resize(nf);
  r.iterations.assign(nf, 0);
  r.converged.assign(nf, true);
  r.history.resize(nf);
  std::optional<Eigen::VectorXcd> prev;
  for (std::size_t f = 0; f < nf; ++f) {
    const RegularizedSolver solver(v.data[f], lambda);
    const Eigen::VectorXcd hv = h.ear(f, ear);
    const Eigen::VectorXcd c_ls = solver.solve(hv);
    if (v.freq_axis->frequency(f) < sched.lo_hz) {
      r.filters[f] = c_ls;
      continue;
    }
    const Eigen::VectorXd abs_h = hv.cwiseAbs();
    Eigen::VectorXcd c = c_ls;
    double err = magnitude_residual(v.data[f], c, abs_h);
    if (prev) {
      Eigen::VectorXcd c_cont = solver.solve(phase_target(v.data[f], *prev, abs_h));
      const double e_cont = magnitude_residual(v.data[f], c_cont, abs_h);
      if (e_cont <= err) {
        c = std::move(c_cont);
        err = e_cont;
      }
    }
    const double ref = abs_h.squaredNorm();
    if (opts.record_history) r.history[f].push_back(ref > 0.0 ? err / ref : err);
    bool done = err == 0.0;
    int it = 0;
    while (!done && it < opts.max_iter) {
      ++it;
      Eigen::VectorXcd c_new = solver.solve(phase_target(v.data[f], c, abs_h));
      const double e_new = magnitude_residual(v.data[f], c_new, abs_h);
      if (!(e_new <= err)) {
        done = true;
        break;
      }
      const double rel = (err - e_new) / err;
      c = std::move(c_new);
      err = e_new;
      if (opts.record_history) r.history[f].push_back(ref > 0.0 ? err / ref : err);
      if (rel < opts.rel_tol || err == 0.0) done = true;
    }
    r.iterations[f] = it;
    r.converged[f] = done;
    r.filters[f] = c;
    prev = c;
  }
  return r;
}

}  // namespace

double magnitude_error(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& c,
                       const Eigen::VectorXcd& h) {
  const Eigen::VectorXd abs_h = h.cwiseAbs();
  const double ref = abs_h.squaredNorm();
  if (!(ref > 0.0)) throw Error(ErrorCode::kZeroReference, "reference HRTF is zero");
  return magnitude_residual(v, c, abs_h) / ref;
}

BsmFilterBank design_ls(const SteeringSet& v, const HrtfSet& h, const NoiseModel& noise) {
  check_design_inputs(v, h);
  BsmFilterBank bank = empty_bank(v, noise, Criterion::kLs);
  const double lambda = noise.ratio();
  parallel_for(v.num_freqs(), [&](std::size_t f) {
    const RegularizedSolver solver(v.data[f], lambda);
    for (Ear e : kEars) bank.weights[f].col(ear_index(e)) = solver.solve(h.ear(f, e));
  });
  return bank;
}

BsmFilterBank design_magls(const SteeringSet& v, const HrtfSet& h, const NoiseModel& noise,
                           const AlphaSchedule& sched, const MaglsOptions& opts) {
  check_design_inputs(v, h);
  sched.validate();
  BsmFilterBank bank = empty_bank(v, noise, Criterion::kMagLs);
  bank.schedule = sched;
  std::vector<MaglsEarResult> per_ear(2);
  parallel_for(2, [&](std::size_t e) {
    per_ear[e] = magls_one_ear(v, h, kEars[e], noise.ratio(), sched, opts);
  });
  auto& diag = bank.magls_diagnostics;
  for (std::size_t e = 0; e < 2; ++e) {
    for (std::size_t f = 0; f < v.num_freqs(); ++f) {
      bank.weights[f].col(static_cast<Eigen::Index>(e)) = per_ear[e].filters[f];
      if (!per_ear[e].converged[f]) ++diag.unconverged_bins;
    }
    diag.iterations.push_back(std::move(per_ear[e].iterations));
    diag.converged.push_back(std::move(per_ear[e].converged));
    if (opts.record_history) diag.history.push_back(std::move(per_ear[e].history));
  }
  return bank;
}

BsmFilterBank design_mixed(const SteeringSet& v, const HrtfSet& h, const NoiseModel& noise,
                           const AlphaSchedule& sched, MixMode mode, const MaglsOptions& opts) {
  BsmFilterBank ls = design_ls(v, h, noise);
  BsmFilterBank mag = design_magls(v, h, noise, sched, opts);
  BsmFilterBank bank = empty_bank(v, noise, Criterion::kMixed);
  bank.schedule = sched;
  bank.mix_mode = mode;
  for (std::size_t f = 0; f < v.num_freqs(); ++f) {
    const double a = alpha_weight(v.freq_axis->frequency(f), sched);
    if (mode == MixMode::kSwitch) {
      bank.weights[f] = a >= 0.5 ? ls.weights[f] : mag.weights[f];
    } else {
      bank.weights[f] = a * ls.weights[f] + (1.0 - a) * mag.weights[f];
    }
  }
  bank.magls_diagnostics = std::move(mag.magls_diagnostics);
  bank.ls_weights = std::move(ls.weights);
  bank.magls_weights = std::move(mag.weights);
  return bank;
}

Eigen::VectorXd fov_weights(const DirectionGrid& grid, const FovSpec& fov) {
  fov.validate();
  Eigen::VectorXd w(grid.size());
  for (std::size_t q = 0; q < grid.size(); ++q) {
    w[static_cast<Eigen::Index>(q)] = fov.contains(grid[q]) ? 1.0 : fov.beta;
  }
  return w;
}

std::pair<SteeringSet, HrtfSet> apply_fov(const SteeringSet& v, const HrtfSet& h,
                                          const FovSpec& fov) {
  require_compatible(v, h);
  const Eigen::VectorXd w = fov_weights(*v.grid, fov);
  SteeringSet vw = v;
  HrtfSet hw = h;
  for (auto& slice : vw.data) slice = slice * w.asDiagonal();
  for (auto& slice : hw.data) slice = slice * w.asDiagonal();
  return {std::move(vw), std::move(hw)};
}

BsmFilterBank design(const SteeringSet& v, const HrtfSet& h, const DesignOptions& opts) {
  const SteeringSet* vp = &v;
  const HrtfSet* hp = &h;
  std::optional<std::pair<SteeringSet, HrtfSet>> weighted;
  if (opts.fov) {
    weighted = apply_fov(v, h, *opts.fov);
    vp = &weighted->first;
    hp = &weighted->second;
  }
  BsmFilterBank bank;
  switch (opts.criterion) {
    case Criterion::kLs: bank = design_ls(*vp, *hp, opts.noise); break;
    case Criterion::kMagLs:
      bank = design_magls(*vp, *hp, opts.noise, opts.schedule, opts.magls);
      break;
    case Criterion::kMixed:
      bank = design_mixed(*vp, *hp, opts.noise, opts.schedule, opts.mix_mode, opts.magls);
      break;
  }
  bank.schedule = opts.schedule;
  bank.fov = opts.fov;
  bank.design_distance = v.source_distance;
  return bank;
}

}  // namespace bsm
