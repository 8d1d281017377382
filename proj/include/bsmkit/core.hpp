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

// Shared domain types. Angles are radians internally: theta is the inclination
// from +z (0..pi), phi the azimuth from +x toward +y (0..2pi). Cartesian
// positions are head-centred meters with +x forward, +y left, +z up.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bsmkit/error.hpp"

namespace bsm {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kDefaultSpeedOfSound = 343.0;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
double wrap_signed(double angle);

class Direction {
 public:
  Direction() = default;
  /// Any real (theta, phi) is accepted and normalized onto the sphere.
  Direction(double theta, double phi);

  static Direction from_unit_vector(const Eigen::Vector3d& u);
  /// Ingestion helper for azimuth/elevation-from-horizon data in degrees.
  static Direction from_az_el_deg(double az_deg, double el_deg);

  double theta() const { return theta_; }
  double phi() const { return phi_; }
  double azimuth_deg() const { return rad2deg(phi_); }
  double elevation_deg() const { return 90.0 - rad2deg(theta_); }
  Eigen::Vector3d unit_vector() const;

 private:
  double theta_ = 0.0;
  double phi_ = 0.0;
};

/// Great-circle angle in [0, pi].
double angular_distance(const Direction& a, const Direction& b);

struct NearestDirection {
  std::size_t index = 0;
  double residual = 0.0;
};

class DirectionGrid {
 public:
  /// Throws kInvalidArgument when empty or when two nodes coincide within
  /// 1e-9 rad.
  DirectionGrid(std::string name, std::vector<Direction> directions);

  static DirectionGrid lebedev_2702();
  /// N equatorial nodes at phi = 2*pi*i/N.
  static DirectionGrid ring(std::size_t n);

  const std::string& name() const { return name_; }
  std::size_t size() const { return directions_.size(); }
  const Direction& operator[](std::size_t i) const { return directions_[i]; }
  const std::vector<Direction>& directions() const { return directions_; }

  /// Minimal angular distance; ties go to the lowest index.
  NearestDirection nearest(const Direction& target) const;

  /// Same directions in the same order, within `tol` radians per node.
  bool same_as(const DirectionGrid& other, double tol = 1e-9) const;

 private:
  std::string name_;
  std::vector<Direction> directions_;
  std::vector<Eigen::Vector3d> units_;
};

NearestDirection nearest_direction(const DirectionGrid& grid,
                                   const Direction& target);

/// Quadrature weights of the 2702-node Lebedev rule, in grid order; they sum
/// to one.
const std::vector<double>& lebedev_2702_weights();

class FrequencyAxis {
 public:
  FrequencyAxis(double sample_rate, std::size_t fft_size,
                double speed_of_sound = kDefaultSpeedOfSound);

  double sample_rate() const { return sample_rate_; }
  std::size_t fft_size() const { return fft_size_; }
  double speed_of_sound() const { return speed_of_sound_; }
  std::size_t size() const { return frequencies_.size(); }
  double frequency(std::size_t i) const { return frequencies_[i]; }
  const std::vector<double>& frequencies() const { return frequencies_; }
  double nyquist() const { return sample_rate_ / 2.0; }
  /// k = 2*pi*f / c.
  double wavenumber(std::size_t i) const;

  bool same_as(const FrequencyAxis& other) const;

 private:
  double sample_rate_;
  std::size_t fft_size_;
  double speed_of_sound_;
  std::vector<double> frequencies_;
};

struct ArrayGeometry {
  std::vector<Eigen::Vector3d> mic_positions;
  std::vector<std::string> labels;

  ArrayGeometry(std::vector<Eigen::Vector3d> positions,
                std::vector<std::string> labels);

  /// Five-microphone glasses frame, millimetre-rounded coordinates.
  static ArrayGeometry builtin_glasses();

  std::size_t size() const { return mic_positions.size(); }
  double max_radius() const;
};

/// Source distance in meters, or the ideal plane-wave marker.
class SourceDistance {
 public:
  static SourceDistance plane_wave() { return SourceDistance(); }
  static SourceDistance meters(double r);

  bool is_plane_wave() const { return !meters_.has_value(); }
  /// Throws kInvalidArgument for the plane-wave marker.
  double value() const;
  std::string to_string() const;
  bool operator==(const SourceDistance& other) const = default;

 private:
  SourceDistance() = default;
  std::optional<double> meters_;
};

enum class Ear : int { kLeft = 0, kRight = 1 };
inline constexpr Ear kEars[2] = {Ear::kLeft, Ear::kRight};
inline int ear_index(Ear ear) { return static_cast<int>(ear); }

using Provenance = std::map<std::string, std::string>;

struct SteeringSet {
  std::shared_ptr<const ArrayGeometry> geometry;
  std::shared_ptr<const DirectionGrid> grid;
  std::shared_ptr<const FrequencyAxis> freq_axis;
  SourceDistance source_distance = SourceDistance::plane_wave();
  /// One M x Q matrix per frequency bin.
  std::vector<Eigen::MatrixXcd> data;
  std::string convention;
  Provenance provenance;

  std::size_t num_freqs() const { return data.size(); }
  std::size_t num_mics() const { return data.empty() ? 0 : data[0].rows(); }
  std::size_t num_dirs() const { return data.empty() ? 0 : data[0].cols(); }
};

struct HrtfSet {
  std::shared_ptr<const DirectionGrid> grid;
  std::shared_ptr<const FrequencyAxis> freq_axis;
  SourceDistance source_distance = SourceDistance::plane_wave();
  /// One 2 x Q matrix per frequency bin; row 0 is the left ear.
  std::vector<Eigen::MatrixXcd> data;
  std::string convention;
  Provenance provenance;

  std::size_t num_freqs() const { return data.size(); }
  std::size_t num_dirs() const { return data.empty() ? 0 : data[0].cols(); }
  /// Q-vector for one ear at one bin.
  Eigen::VectorXcd ear(std::size_t f, Ear e) const {
    return data[f].row(ear_index(e)).transpose();
  }
};

struct NoiseModel {
  double sigma_s_sq = 1.0;
  double sigma_n_sq = 0.0;

  NoiseModel() = default;
  NoiseModel(double s, double n);
  /// sigma_s^2 = 1, sigma_n^2 = 10^(-snr/10).
  static NoiseModel from_snr_db(double snr_db);

  double ratio() const { return sigma_n_sq / sigma_s_sq; }
  /// Throws kInvalidArgument when sigma_n^2 is zero.
  double snr_db() const;
};

struct BinauralSpectrum {
  Eigen::VectorXcd left;
  Eigen::VectorXcd right;
};

struct BinauralTime {
  double sample_rate = 0.0;
  std::vector<double> left;
  std::vector<double> right;
};

/// Throws kIncompatible unless both sets share grid directions and the
/// frequency axis.
void require_compatible(const SteeringSet& v, const HrtfSet& h);

}  // namespace bsm
