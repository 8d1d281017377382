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

#include <cmath>
#include <numeric>

#include "bsmkit/dsp.hpp"
#include "bsmkit/metrics.hpp"
#include "bsmkit/steering.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bsm;
using bsm::testing::Gen;
using bsm::testing::random_pair;

namespace {

// Straight loops over directions, no matrix algebra.
double eps_ls_loop(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& c, const Eigen::VectorXcd& h,
                   double s2, double n2) {
  double mis = 0.0, ref = 0.0;
  for (Eigen::Index q = 0; q < v.cols(); ++q) {
    cplx y = 0.0;
    for (Eigen::Index m = 0; m < v.rows(); ++m) y += std::conj(c[m]) * v(m, q);
    mis += std::norm(y - h[q]);
    ref += std::norm(h[q]);
  }
  double cn = 0.0;
  for (Eigen::Index m = 0; m < c.size(); ++m) cn += std::norm(c[m]);
  return (s2 * mis + n2 * cn) / (s2 * ref);
}

double eps_mag_loop(const Eigen::MatrixXcd& v, const Eigen::VectorXcd& c, const Eigen::VectorXcd& h) {
  double mis = 0.0, ref = 0.0;
  for (Eigen::Index q = 0; q < v.cols(); ++q) {
    cplx y = 0.0;
    for (Eigen::Index m = 0; m < v.rows(); ++m) y += std::conj(c[m]) * v(m, q);
    mis += std::pow(std::abs(y) - std::abs(h[q]), 2);
    ref += std::norm(h[q]);
  }
  return mis / ref;
}

// Integer lag maximizing the linear cross-correlation sum_n l[n] r[n - lag].
int xcorr_lag(const std::vector<double>& l, const std::vector<double>& r, int max_lag) {
  int best = 0;
  double best_val = -1e300;
  const int n = static_cast<int>(l.size());
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const int j = i - lag;
      if (j >= 0 && j < n) s += l[i] * r[j];
    }
    if (s > best_val) {
      best_val = s;
      best = lag;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("normalized errors match direct loops") {
  Gen g(41);
  for (int i = 0; i < 200; ++i) {
    const Eigen::MatrixXcd v = g.complex_matrix(5, 20);
    const Eigen::VectorXcd c = g.complex_vector(5);
    const Eigen::VectorXcd h = g.complex_vector(20);
    const NoiseModel noise(g.uniform(0.5, 2.0), g.uniform(0.0, 0.5));
    CHECK(eps_ls_bin(v, c, h, noise) ==
          doctest::Approx(eps_ls_loop(v, c, h, noise.sigma_s_sq, noise.sigma_n_sq)).epsilon(1e-12));
    CHECK(eps_magls_bin(v, c, h) == doctest::Approx(eps_mag_loop(v, c, h)).epsilon(1e-12));
  }
}

TEST_CASE("error properties") {
  Gen g(42);
  for (int i = 0; i < 100; ++i) {
    const Eigen::MatrixXcd v = g.complex_matrix(5, 20);
    const Eigen::VectorXcd c = g.complex_vector(5);
    const Eigen::VectorXcd h = g.complex_vector(20);
    // Zero filter: complex error is exactly 1.
    CHECK(eps_ls_bin(v, Eigen::VectorXcd::Zero(5), h, NoiseModel::from_snr_db(20)) == doctest::Approx(1.0));
    // Magnitude error ignores per-direction phase of the reference.
    Eigen::VectorXcd hp = h;
    for (Eigen::Index q = 0; q < hp.size(); ++q) hp[q] *= std::polar(1.0, g.uniform(0, kTwoPi));
    CHECK(eps_magls_bin(v, c, hp) == doctest::Approx(eps_magls_bin(v, c, h)).epsilon(1e-12));
    // Magnitude error never exceeds the noise-free complex error.
    CHECK(eps_magls_bin(v, c, h) <= eps_ls_bin(v, c, h, NoiseModel(1.0, 0.0)) + 1e-12);
    // Scale invariance in h and c together.
    const double s = g.uniform(0.1, 10.0);
    CHECK(eps_magls_bin(v, s * c, s * h) == doctest::Approx(eps_magls_bin(v, c, h)).epsilon(1e-12));
  }
  const Eigen::MatrixXcd v = g.complex_matrix(3, 4);
  try {
    eps_ls_bin(v, g.complex_vector(3), Eigen::VectorXcd::Zero(4), NoiseModel());
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroReference);
  }
  CHECK_THROWS_AS(eps_magls_bin(v, g.complex_vector(3), Eigen::VectorXcd::Zero(4)), Error);
}

TEST_CASE("mixed error interpolation") {
  CHECK(eps_mixed(0.3, 0.7, 500.0) == 0.3);
  CHECK(eps_mixed(0.3, 0.7, 1500.0) == 0.7);
  CHECK(eps_mixed(0.3, 0.7, 1150.0) == doctest::Approx(0.5));
  CHECK(eps_mixed(0.2, 0.9, 1000.0) == doctest::Approx(5.0 / 7.0 * 0.2 + 2.0 / 7.0 * 0.9));
}

TEST_CASE("per-bin error vectors skip silent references") {
  Gen g(43);
  auto [v, h] = random_pair(g, 4, 10, 8);
  const BsmFilterBank c = design_ls(v, h, NoiseModel::from_snr_db(20));
  h.data[2].row(0).setZero();
  const auto e = eps_ls(v, c, h, c.noise, Ear::kLeft);
  REQUIRE(e.size() == v.num_freqs());
  CHECK_FALSE(e[2].has_value());
  CHECK(e[1].has_value());
  const std::vector<std::size_t> subset = {0, 3, 4};
  const auto es = eps_magls(v, c, h, Ear::kRight, subset);
  const Eigen::MatrixXcd vs = v.data[1](Eigen::all, std::vector<int>{0, 3, 4});
  const Eigen::VectorXcd hs = h.ear(1, Ear::kRight)(std::vector<int>{0, 3, 4});
  CHECK(*es[1] == doctest::Approx(eps_mag_loop(vs, c.ear(1, Ear::kRight), hs)));
}

TEST_CASE("ERB centres follow uniform auditory-rate spacing") {
  const FrequencyAxis axis(48000.0, 2048);
  const ErbFilterbank bank = make_erb_filterbank(axis);
  REQUIRE(bank.centers.size() == 32);
  CHECK_FALSE(bank.clamped);
  CHECK(bank.centers.front() == doctest::Approx(1500.0));
  CHECK(bank.centers.back() < 20000.0);
  const double o = 9.26449 * 24.7;
  const double step = std::log(bank.centers[1] + o) - std::log(bank.centers[0] + o);
  for (std::size_t i = 1; i < bank.centers.size(); ++i) {
    CHECK(bank.centers[i] > bank.centers[i - 1]);
    CHECK(std::log(bank.centers[i] + o) - std::log(bank.centers[i - 1] + o) ==
          doctest::Approx(step).epsilon(1e-10));
  }
  // The next step up would land exactly on the upper edge.
  CHECK(std::log(20000.0 + o) - std::log(bank.centers.back() + o) == doctest::Approx(step).epsilon(1e-10));
  CHECK(erb_bandwidth(1000.0) == doctest::Approx(1000.0 / 9.26449 + 24.7));
  // Magnitude responses never exceed their unit peak.
  for (int b = 0; b < bank.n_bands; ++b) CHECK(bank.response.row(b).maxCoeff() <= 1.0);
  const ErbFilterbank low = make_erb_filterbank(FrequencyAxis(16000.0, 512));
  CHECK(low.clamped);
  CHECK(low.f_hi == 8000.0);
}

TEST_CASE("ILD calibration and symmetry") {
  const FrequencyAxis axis(48000.0, 1024);
  const ErbFilterbank bank = make_erb_filterbank(axis);
  Gen g(44);
  std::vector<cplx> l(axis.size()), r(axis.size());
  for (std::size_t k = 0; k < axis.size(); ++k) {
    r[k] = g.complex_normal();
    l[k] = 2.0 * r[k];
  }
  const IldResult res = ild(l, r, bank);
  CHECK(res.average == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));
  CHECK(std::abs(res.average - 6.0206) < 0.01);
  CHECK(ild(r, l, bank).average == doctest::Approx(-20.0 * std::log10(2.0)).epsilon(1e-9));
  CHECK(ild(r, r, bank).average == 0.0);
  CHECK(res.silent_count == 0);
  CHECK(ild_error({l, r}, {l, r}, bank) == 0.0);
  CHECK(ild_error({l, r}, {r, r}, bank) == doctest::Approx(20.0 * std::log10(2.0)));

  std::vector<cplx> zero(axis.size(), 0.0);
  const IldResult silent = ild(zero, r, bank);
  CHECK(silent.silent_count == 32);
  CHECK(silent.average == 0.0);
  CHECK_THROWS_AS(ild(std::vector<cplx>(3), std::vector<cplx>(3), bank), Error);
}

TEST_CASE("ITD of a pure delay") {
  const double fs = 48000.0;
  std::vector<double> l(1024, 0.0), r(1024, 0.0);
  l[100 + 24] = 1.0;
  r[100] = 1.0;
  const double t = itd(l, r, fs);
  CHECK(std::abs(t - 500e-6) < 1.0 / fs);
  CHECK(t == doctest::Approx(500e-6).epsilon(1e-9));
  CHECK(itd(r, l, fs) == doctest::Approx(-500e-6).epsilon(1e-9));
  CHECK(itd(l, l, fs) == 0.0);
  CHECK(itd_error({l, r}, {r, r}, fs) == doctest::Approx(500e-6).epsilon(1e-9));
}

TEST_CASE("ITD agrees with a cross-correlation oracle on random delayed pairs") {
  Gen g(45);
  const double fs = 48000.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2048;
    const int d = g.integer(-40, 40);
    // Low-passed noise burst, well inside the frame after the delay.
    std::vector<double> s(n, 0.0);
    for (int i = 300; i < 900; ++i) s[i] = g.normal();
    for (int pass = 0; pass < 3; ++pass) {
      for (int i = n - 1; i > 0; --i) s[i] = 0.5 * (s[i] + s[i - 1]);
    }
    std::vector<double> l(n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (i - d >= 0 && i - d < n) l[i] = s[i - d];
    }
    const double t = itd(l, s, fs);
    const int lag = xcorr_lag(l, s, 60);
    CHECK(lag == d);
    CHECK(std::abs(t - lag / fs) < 1.0 / fs);
  }
}

TEST_CASE("ITD exclusion and errors") {
  std::vector<double> z(64, 0.0);
  std::vector<double> one(64, 0.0);
  one[3] = 1.0;
  try {
    itd(z, one, 48000.0);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAllBinsExcluded);
  }
  // fmax below the first bin leaves nothing.
  CHECK_THROWS_AS(itd(one, one, 48000.0, 10.0), Error);
  CHECK_THROWS_AS(itd(one, std::vector<double>(32), 48000.0), Error);
}

TEST_CASE("null-space projection agrees with an eigen-decomposition projector") {
  Gen g(46);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index m = 5, q = 40;
    const Eigen::MatrixXcd v = g.complex_matrix(m, q);
    const Eigen::VectorXcd h = g.complex_vector(q);
    // Gram matrix of V^T: conj(V) V^T, eigenvectors w give u = V^T w / sigma.
    const Eigen::MatrixXcd vt = v.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(vt.adjoint() * vt);
    const Eigen::VectorXd lam = es.eigenvalues();
    const double smax = std::sqrt(lam.maxCoeff());
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(q, q);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double s = std::sqrt(std::max(lam[i], 0.0));
      if (s < smax * 0.1) continue;
      const Eigen::VectorXcd u = vt * es.eigenvectors().col(i) / s;
      p += u * u.adjoint();
    }
    const double expect = 10.0 * std::log10((h - p * h).squaredNorm() / h.squaredNorm());
    CHECK(null_space_projection(v, h) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("null-space threshold keeps singular values within 20 dB of the largest") {
  Gen g(47);
  const Eigen::Index m = 5, q = 30;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qa(g.complex_matrix(q, q));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qb(g.complex_matrix(m, m));
  const Eigen::MatrixXcd u = qa.householderQ() * Eigen::MatrixXcd::Identity(q, m);
  const Eigen::MatrixXcd w = qb.householderQ() * Eigen::MatrixXcd::Identity(m, m);
  Eigen::VectorXd s(5);
  s << 1.0, 0.5, 0.2, 0.05, 0.001;
  const Eigen::MatrixXcd vt = u * s.cast<cplx>().asDiagonal() * w.adjoint();
  const NullSpaceProjector proj(vt.transpose());
  CHECK(proj.retained_rank() == 3);
  // A vector in the dropped directions is entirely in the "null" part.
  CHECK(proj.project_db(u.col(3)) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(proj.project_db(u.col(0)) == kNullFloorDb);
  // Threshold at -30 dB keeps the 0.05 direction too.
  CHECK(NullSpaceProjector(vt.transpose(), -30.0).retained_rank() == 4);
}

TEST_CASE("evaluate produces consistent frequency and direction rows") {
  auto geom = std::make_shared<const ArrayGeometry>(ArrayGeometry::builtin_glasses());
  auto grid = std::make_shared<const DirectionGrid>(DirectionGrid::ring(36));
  auto axis = std::make_shared<const FrequencyAxis>(16000.0, 64);
  const SteeringSet v = point_source_steering(geom, grid, 0.45, axis);
  const HrtfSet h = free_field_ear_proxy(grid, SourceDistance::meters(0.45), axis);
  DesignOptions dopts;
  const BsmFilterBank c = design(v, h, dopts);
  const MetricsReport all = evaluate(c, v, h);
  REQUIRE(all.frequency_rows.size() == v.num_freqs());
  for (std::size_t f = 0; f < v.num_freqs(); ++f) {
    const auto& row = all.frequency_rows[f];
    CHECK(row.f_hz == axis->frequency(f));
    for (int e = 0; e < 2; ++e) {
      REQUIRE(row.eps_mix[e]);
      CHECK(*row.eps_mix[e] ==
            doctest::Approx(eps_mixed(*row.eps_ls[e], *row.eps_magls[e], row.f_hz)).epsilon(1e-14));
      CHECK(*row.xi_null[e] <= 1e-9);
    }
  }
  std::size_t ild_rows = 0, itd_rows = 0;
  for (const auto& d : all.direction_rows) {
    ild_rows += d.metric == "ild_db";
    itd_rows += d.metric == "itd_s";
    CHECK(d.region == RegionTag::kAll);
    CHECK(d.abs_err >= 0.0);
  }
  CHECK(ild_rows == 36);
  CHECK(itd_rows == 36);
  CHECK(all.provenance.at("itd_jnd_frontal_s") == "2e-05");
  CHECK(all.provenance.at("itd_jnd_lateral_s") == "1e-04");
  CHECK(all.provenance.at("ild_jnd_db") == "1");
  CHECK(std::stod(all.provenance.at("noise_sigma_n_sq")) == c.noise.sigma_n_sq);

  EvaluateOptions in;
  in.region = RegionTag::kInFov;
  const MetricsReport inside = evaluate(c, v, h, in);
  EvaluateOptions out;
  out.region = RegionTag::kOutFov;
  const MetricsReport outside = evaluate(c, v, h, out);
  CHECK(inside.direction_rows.size() == 2 * 9);  // -40 .. 40 deg
  CHECK(outside.direction_rows.size() == 2 * 27);
  for (const auto& d : inside.direction_rows) {
    CHECK(d.region == RegionTag::kInFov);
    CHECK(std::abs(wrap_signed(deg2rad(d.az_deg))) <= deg2rad(45.0) + 1e-12);
  }
  // In-region errors are computed on the subset only.
  const std::vector<std::size_t> idx = region_indices(*grid, RegionTag::kInFov, FovSpec{});
  const auto sub = eps_ls(v, c, h, c.noise, Ear::kLeft, idx);
  CHECK(*inside.frequency_rows[5].eps_ls[0] == doctest::Approx(*sub[5]).epsilon(1e-13));

  const ReportSummary s = summarize(all);
  double sum = 0.0;
  int n = 0;
  for (const auto& row : all.frequency_rows) {
    if (row.f_hz >= 75.0 && row.f_hz <= 10000.0) {
      sum += *row.eps_mix[0];
      ++n;
    }
  }
  CHECK(*s.eps_mix_avg[0] == doctest::Approx(sum / n));
}

TEST_CASE("evaluate rejects mismatched filters") {
  auto geom = std::make_shared<const ArrayGeometry>(ArrayGeometry::builtin_glasses());
  auto grid = std::make_shared<const DirectionGrid>(DirectionGrid::ring(8));
  auto a1 = std::make_shared<const FrequencyAxis>(16000.0, 32);
  auto a2 = std::make_shared<const FrequencyAxis>(16000.0, 64);
  const SteeringSet v1 = plane_wave_steering(geom, grid, a1);
  const HrtfSet h1 = free_field_ear_proxy(grid, SourceDistance::plane_wave(), a1);
  const SteeringSet v2 = plane_wave_steering(geom, grid, a2);
  const HrtfSet h2 = free_field_ear_proxy(grid, SourceDistance::plane_wave(), a2);
  const BsmFilterBank c = design_ls(v1, h1, NoiseModel::from_snr_db(20));
  try {
    evaluate(c, v2, h2);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIncompatible);
  }
  CHECK(region_from_string("in-fov") == RegionTag::kInFov);
  CHECK_THROWS_AS(region_from_string("front"), Error);
}
