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

#include "bsmkit/steering.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bsm;
using bsm::testing::Gen;

namespace {

auto glasses() { return std::make_shared<const ArrayGeometry>(ArrayGeometry::builtin_glasses()); }
auto axis(std::size_t n = 64, double fs = 16000.0) {
  return std::make_shared<const FrequencyAxis>(fs, n);
}

}  // namespace

TEST_CASE("point-source steering matches the free-field Green's function") {
  auto grid = std::make_shared<const DirectionGrid>(DirectionGrid::ring(12));
  const SteeringSet v = point_source_steering(glasses(), grid, 0.5, axis());
  CHECK(v.num_freqs() == 33);
  CHECK(v.num_mics() == 5);
  CHECK(v.num_dirs() == 12);
  CHECK(v.source_distance == SourceDistance::meters(0.5));
  for (std::size_t f : {0u, 5u, 32u}) {
    const double k = kTwoPi * v.freq_axis->frequency(f) / 343.0;
    for (std::size_t q = 0; q < 12; ++q) {
      for (std::size_t m = 0; m < 5; ++m) {
        const double d = (0.5 * (*grid)[q].unit_vector() - v.geometry->mic_positions[m]).norm();
        const cplx expect = std::polar(1.0 / (4.0 * kPi * d), -k * d);
        CHECK(std::abs(v.data[f](m, q) - expect) < 1e-14);
      }
    }
  }
}

TEST_CASE("plane-wave steering is a unit-modulus phase term") {
  Gen g(21);
  auto grid = std::make_shared<const DirectionGrid>(DirectionGrid::ring(8));
  const SteeringSet v = plane_wave_steering(glasses(), grid, axis());
  CHECK(v.source_distance.is_plane_wave());
  for (std::size_t f = 0; f < v.num_freqs(); ++f) {
    CHECK((v.data[f].cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
  }
  const double k = v.freq_axis->wavenumber(10);
  const double proj = (*grid)[3].unit_vector().dot(v.geometry->mic_positions[2]);
  CHECK(std::abs(v.data[10](2, 3) - std::polar(1.0, k * proj)) < 1e-14);
}

TEST_CASE("far point sources approach plane waves after removing spreading and delay") {
  auto grid = std::make_shared<const DirectionGrid>(DirectionGrid::ring(6));
  const double r = 2000.0;
  const SteeringSet ps = point_source_steering(glasses(), grid, r, axis());
  const SteeringSet pw = plane_wave_steering(glasses(), grid, axis());
  for (std::size_t f = 1; f < ps.num_freqs(); f += 7) {
    const double k = ps.freq_axis->wavenumber(f);
    const cplx norm = std::polar(4.0 * kPi * r, k * r);
    const Eigen::MatrixXcd scaled = ps.data[f] * norm;
    CHECK((scaled - pw.data[f]).cwiseAbs().maxCoeff() < 2e-3);
  }
}

TEST_CASE("source placement errors") {
  auto grid = std::make_shared<const DirectionGrid>(DirectionGrid::ring(4));
  // Inside the array radius.
  CHECK_THROWS_AS(point_source_steering(glasses(), grid, 0.05, axis()), Error);
  // A mic exactly on the source sphere at a grid direction.
  auto geom = std::make_shared<const ArrayGeometry>(
      std::vector<Eigen::Vector3d>{Eigen::Vector3d(0.0, 0.0, 0.0), Eigen::Vector3d(0.2, 0.0, 0.0)},
      std::vector<std::string>{});
  try {
    point_source_steering(geom, grid, 0.2 + 1e-4, axis());
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSourceInsideArray);
  }
}

TEST_CASE("ear proxy transfer points") {
  auto grid = std::make_shared<const DirectionGrid>(DirectionGrid::ring(4));
  const HrtfSet h = free_field_ear_proxy(grid, SourceDistance::meters(1.0), axis());
  CHECK(h.num_dirs() == 4);
  // Source at +y (azimuth 90 deg) is 0.91 m from the left ear and 1.09 m from the right.
  const std::size_t f = 3;
  const double k = h.freq_axis->wavenumber(f);
  CHECK(std::abs(h.data[f](0, 1) - std::polar(1.0 / (4 * kPi * 0.91), -k * 0.91)) < 1e-14);
  CHECK(std::abs(h.data[f](1, 1) - std::polar(1.0 / (4 * kPi * 1.09), -k * 1.09)) < 1e-14);
  // Frontal source: symmetric ears.
  CHECK(std::abs(h.data[f](0, 0) - h.data[f](1, 0)) < 1e-15);
  CHECK_THROWS_AS(free_field_ear_proxy(grid, SourceDistance::meters(0.05), axis()), Error);
  const HrtfSet pw = free_field_ear_proxy(grid, SourceDistance::plane_wave(), axis());
  CHECK(pw.source_distance.is_plane_wave());
}

TEST_CASE("validation reports non-finite entries and shape problems") {
  auto grid = std::make_shared<const DirectionGrid>(DirectionGrid::ring(4));
  SteeringSet v = plane_wave_steering(glasses(), grid, axis(16));
  CHECK(validate_steering(v).empty());
  v.data[2](1, 3) = cplx(std::nan(""), 0.0);
  const auto issues = validate_steering(v);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0] == "non-finite entry at [2][1][3]");
  v.data.pop_back();
  CHECK_FALSE(validate_steering(v).empty());

  HrtfSet h = free_field_ear_proxy(grid, SourceDistance::plane_wave(), axis(16));
  CHECK(validate_hrtf(h).empty());
  h.data[0] = Eigen::MatrixXcd::Zero(3, 4);
  CHECK_FALSE(validate_hrtf(h).empty());
}
