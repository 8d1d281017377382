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

#include "bsmkit/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace bsm {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSourceInsideArray: return "SourceInsideArray";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kZeroReference: return "ZeroReference";
    case ErrorCode::kSilentChannel: return "SilentChannel";
    case ErrorCode::kAllBinsExcluded: return "AllBinsExcluded";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kSchemaUnknown: return "SchemaUnknown";
    case ErrorCode::kDimsMismatch: return "DimsMismatch";
    case ErrorCode::kBadFrameConfig: return "BadFrameConfig";
    case ErrorCode::kIncompatible: return "Incompatible";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

double wrap_signed(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  if (a > kPi) a -= kTwoPi;
  return a;
}

namespace {

double wrap_positive(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

}  // namespace

Direction::Direction(double theta, double phi) {
  if (!std::isfinite(theta) || !std::isfinite(phi)) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite direction");
  }
  double t = wrap_positive(theta);
  if (t > kPi) {
    t = kTwoPi - t;
    phi += kPi;
  }
  theta_ = t;
  phi_ = wrap_positive(phi);
}

Direction Direction::from_unit_vector(const Eigen::Vector3d& u) {
  const double n = u.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::kInvalidArgument, "zero vector");
  const double theta = std::acos(std::clamp(u.z() / n, -1.0, 1.0));
  const double phi = std::atan2(u.y(), u.x());
  return Direction(theta, phi);
}

Direction Direction::from_az_el_deg(double az_deg, double el_deg) {
  return Direction(deg2rad(90.0 - el_deg), deg2rad(az_deg));
}

Eigen::Vector3d Direction::unit_vector() const {
  const double s = std::sin(theta_);
  return {s * std::cos(phi_), s * std::sin(phi_), std::cos(theta_)};
}

double angular_distance(const Direction& a, const Direction& b) {
  const Eigen::Vector3d u = a.unit_vector();
  const Eigen::Vector3d v = b.unit_vector();
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

// --- DirectionGrid ----------------------------------------------------------

DirectionGrid::DirectionGrid(std::string name, std::vector<Direction> directions)
    : name_(std::move(name)), directions_(std::move(directions)) {
  if (directions_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "direction grid is empty");
  }
  units_.reserve(directions_.size());
  for (const auto& d : directions_) units_.push_back(d.unit_vector());
  // chord < 1e-9 is equivalent to angle < 1e-9 at this scale
  for (std::size_t i = 0; i < units_.size(); ++i) {
    for (std::size_t j = i + 1; j < units_.size(); ++j) {
      if ((units_[i] - units_[j]).squaredNorm() < 1e-18) {
        std::ostringstream os;
        os << "grid nodes " << i << " and " << j << " coincide";
        throw Error(ErrorCode::kInvalidArgument, os.str());
      }
    }
  }
}

namespace {

struct LebedevEntry {
  double x, y, z, w;
};

constexpr LebedevEntry kLebedevOrbits[] = {
#include "lebedev_2702_table.inc"
};

struct LebedevRule {
  std::vector<Direction> directions;
  std::vector<double> weights;
};

// Expands each orbit representative under the octahedral group (coordinate
// permutations and sign flips).
const LebedevRule& lebedev_rule() {
  static const LebedevRule rule = [] {
    LebedevRule r;
    constexpr std::array<std::array<int, 3>, 6> perms = {{
        {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (const auto& e : kLebedevOrbits) {
      const std::array<double, 3> base = {e.x, e.y, e.z};
      std::vector<Eigen::Vector3d> orbit;
      for (const auto& p : perms) {
        for (int s = 0; s < 8; ++s) {
          Eigen::Vector3d v(base[p[0]], base[p[1]], base[p[2]]);
          if (s & 1) v.x() = -v.x();
          if (s & 2) v.y() = -v.y();
          if (s & 4) v.z() = -v.z();
          const bool seen = std::any_of(orbit.begin(), orbit.end(), [&](const auto& o) {
            return (o - v).squaredNorm() < 1e-24;
          });
          if (!seen) orbit.push_back(v);
        }
      }
      for (const auto& v : orbit) {
        r.directions.push_back(Direction::from_unit_vector(v));
        r.weights.push_back(e.w);
      }
    }
    if (r.directions.size() != 2702) {
      throw Error(ErrorCode::kInvalidArgument, "corrupt Lebedev table");
    }
    return r;
  }();
  return rule;
}

}  // namespace

DirectionGrid DirectionGrid::lebedev_2702() {
  return DirectionGrid("lebedev-2702", lebedev_rule().directions);
}

const std::vector<double>& lebedev_2702_weights() { return lebedev_rule().weights; }

DirectionGrid DirectionGrid::ring(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "ring needs N >= 1");
  std::vector<Direction> dirs;
  dirs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    dirs.emplace_back(kPi / 2.0, kTwoPi * static_cast<double>(i) / static_cast<double>(n));
  }
  return DirectionGrid("ring:" + std::to_string(n), std::move(dirs));
}

NearestDirection DirectionGrid::nearest(const Direction& target) const {
  const Eigen::Vector3d t = target.unit_vector();
  NearestDirection best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const double a = std::atan2(units_[i].cross(t).norm(), units_[i].dot(t));
    if (a < best.residual) best = {i, a};
  }
  return best;
}

bool DirectionGrid::same_as(const DirectionGrid& other, double tol) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (angular_distance(directions_[i], other.directions_[i]) > tol) return false;
  }
  return true;
}

NearestDirection nearest_direction(const DirectionGrid& grid, const Direction& target) {
  return grid.nearest(target);
}

// --- FrequencyAxis ----------------------------------------------------------

FrequencyAxis::FrequencyAxis(double sample_rate, std::size_t fft_size, double speed_of_sound)
    : sample_rate_(sample_rate), fft_size_(fft_size), speed_of_sound_(speed_of_sound) {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  if (fft_size < 2 || fft_size % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "fft size must be a positive even integer");
  }
  if (!(speed_of_sound > 0.0) || !std::isfinite(speed_of_sound)) {
    throw Error(ErrorCode::kInvalidArgument, "speed of sound must be positive");
  }
  frequencies_.resize(fft_size / 2 + 1);
  for (std::size_t i = 0; i < frequencies_.size(); ++i) {
    frequencies_[i] = static_cast<double>(i) * sample_rate / static_cast<double>(fft_size);
  }
}

double FrequencyAxis::wavenumber(std::size_t i) const {
  return kTwoPi * frequencies_[i] / speed_of_sound_;
}

bool FrequencyAxis::same_as(const FrequencyAxis& other) const {
  return sample_rate_ == other.sample_rate_ && fft_size_ == other.fft_size_ &&
         speed_of_sound_ == other.speed_of_sound_;
}

// --- ArrayGeometry ----------------------------------------------------------

ArrayGeometry::ArrayGeometry(std::vector<Eigen::Vector3d> positions,
                             std::vector<std::string> names)
    : mic_positions(std::move(positions)), labels(std::move(names)) {
  if (mic_positions.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "array needs at least one microphone");
  }
  if (labels.empty()) {
    for (std::size_t m = 0; m < mic_positions.size(); ++m) {
      labels.push_back("mic" + std::to_string(m));
    }
  }
  if (labels.size() != mic_positions.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label count does not match microphone count");
  }
  for (const auto& p : mic_positions) {
    if (!p.allFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite mic position");
  }
}

ArrayGeometry ArrayGeometry::builtin_glasses() {
  // millimetres, head centre origin
  return ArrayGeometry(
      {
          Eigen::Vector3d(101, -17, -5) * 1e-3,
          Eigen::Vector3d(31, 77, 21) * 1e-3,
          Eigen::Vector3d(31, -77, 21) * 1e-3,
          Eigen::Vector3d(86, 73, 29) * 1e-3,
          Eigen::Vector3d(86, -73, 29) * 1e-3,
      },
      {"Nose", "Left mid-temple", "Right mid-temple", "Left logo", "Right logo"});
}

double ArrayGeometry::max_radius() const {
  double r = 0.0;
  for (const auto& p : mic_positions) r = std::max(r, p.norm());
  return r;
}

// --- SourceDistance / NoiseModel -------------------------------------------

SourceDistance SourceDistance::meters(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::kInvalidArgument, "source distance must be positive and finite");
  }
  SourceDistance d;
  d.meters_ = r;
  return d;
}

double SourceDistance::value() const {
  if (!meters_) throw Error(ErrorCode::kInvalidArgument, "plane-wave source has no distance");
  return *meters_;
}

std::string SourceDistance::to_string() const {
  if (!meters_) return "planewave";
  std::ostringstream os;
  os.precision(17);
  os << *meters_;
  return os.str();
}

NoiseModel::NoiseModel(double s, double n) : sigma_s_sq(s), sigma_n_sq(n) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::kInvalidArgument, "signal power must be positive");
  }
  if (!(n >= 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kInvalidArgument, "noise power must be non-negative");
  }
}

NoiseModel NoiseModel::from_snr_db(double snr_db) {
  return NoiseModel(1.0, std::pow(10.0, -snr_db / 10.0));
}

double NoiseModel::snr_db() const {
  if (sigma_n_sq <= 0.0) throw Error(ErrorCode::kInvalidArgument, "noiseless model has no SNR");
  return 10.0 * std::log10(sigma_s_sq / sigma_n_sq);
}

void require_compatible(const SteeringSet& v, const HrtfSet& h) {
  if (!v.grid || !h.grid || !v.freq_axis || !h.freq_axis) {
    throw Error(ErrorCode::kIncompatible, "dataset is missing grid or frequency axis");
  }
  if (!v.freq_axis->same_as(*h.freq_axis)) {
    throw Error(ErrorCode::kIncompatible, "steering and HRTF frequency axes differ");
  }
  if (!v.grid->same_as(*h.grid)) {
    throw Error(ErrorCode::kIncompatible, "steering and HRTF grids differ");
  }
  if (v.num_freqs() != h.num_freqs() || v.num_dirs() != h.num_dirs()) {
    throw Error(ErrorCode::kIncompatible, "steering and HRTF dimensions differ");
  }
}

}  // namespace bsm
