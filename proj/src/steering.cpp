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

#include "bsmkit/steering.hpp"

#include <cmath>
#include <sstream>

namespace bsm {

namespace {

constexpr double kMinSourceMicDistance = 1e-3;
const cplx kI(0.0, 1.0);

void require_inputs(const std::shared_ptr<const DirectionGrid>& grid,
                    const std::shared_ptr<const FrequencyAxis>& axis) {
  if (!grid || !axis) throw Error(ErrorCode::kInvalidArgument, "missing grid or frequency axis");
}

// Transfer from a point source at `src` to each receiver in `points`, one
// column per grid direction.
std::vector<Eigen::MatrixXcd> point_source_transfer(const std::vector<Eigen::Vector3d>& points,
                                                    const DirectionGrid& grid, double r_s,
                                                    const FrequencyAxis& axis) {
  const std::size_t m_count = points.size();
  const std::size_t q_count = grid.size();
  Eigen::MatrixXd dist(m_count, q_count);
  for (std::size_t q = 0; q < q_count; ++q) {
    const Eigen::Vector3d src = r_s * grid[q].unit_vector();
    for (std::size_t m = 0; m < m_count; ++m) {
      const double d = (src - points[m]).norm();
      if (d < kMinSourceMicDistance) {
        std::ostringstream os;
        os << "source " << q << " is " << d << " m from receiver " << m;
        throw Error(ErrorCode::kSourceInsideArray, os.str());
      }
      dist(m, q) = d;
    }
  }
  std::vector<Eigen::MatrixXcd> data(axis.size(), Eigen::MatrixXcd(m_count, q_count));
  for (std::size_t f = 0; f < axis.size(); ++f) {
    const double k = axis.wavenumber(f);
    data[f] = dist.unaryExpr([k](double d) { return std::exp(-kI * (k * d)) / (4.0 * kPi * d); });
  }
  return data;
}

std::vector<Eigen::MatrixXcd> plane_wave_transfer(const std::vector<Eigen::Vector3d>& points,
                                                  const DirectionGrid& grid,
                                                  const FrequencyAxis& axis) {
  Eigen::MatrixXd proj(points.size(), grid.size());
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const Eigen::Vector3d u = grid[q].unit_vector();
    for (std::size_t m = 0; m < points.size(); ++m) proj(m, q) = u.dot(points[m]);
  }
  std::vector<Eigen::MatrixXcd> data(axis.size());
  for (std::size_t f = 0; f < axis.size(); ++f) {
    const double k = axis.wavenumber(f);
    data[f] = proj.unaryExpr([k](double p) { return std::exp(kI * (k * p)); });
  }
  return data;
}

}  // namespace

SteeringSet point_source_steering(std::shared_ptr<const ArrayGeometry> geometry,
                                  std::shared_ptr<const DirectionGrid> grid, double r_s,
                                  std::shared_ptr<const FrequencyAxis> freq_axis) {
  require_inputs(grid, freq_axis);
  if (!geometry) throw Error(ErrorCode::kInvalidArgument, "missing geometry");
  if (!(r_s > geometry->max_radius())) {
    std::ostringstream os;
    os << "source distance " << r_s << " m must exceed the array radius "
       << geometry->max_radius() << " m";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  SteeringSet s;
  s.data = point_source_transfer(geometry->mic_positions, *grid, r_s, *freq_axis);
  s.geometry = std::move(geometry);
  s.grid = std::move(grid);
  s.freq_axis = std::move(freq_axis);
  s.source_distance = SourceDistance::meters(r_s);
  s.convention = "free-field point source exp(-ikd)/(4 pi d)";
  return s;
}

SteeringSet plane_wave_steering(std::shared_ptr<const ArrayGeometry> geometry,
                                std::shared_ptr<const DirectionGrid> grid,
                                std::shared_ptr<const FrequencyAxis> freq_axis) {
  require_inputs(grid, freq_axis);
  if (!geometry) throw Error(ErrorCode::kInvalidArgument, "missing geometry");
  SteeringSet s;
  s.data = plane_wave_transfer(geometry->mic_positions, *grid, *freq_axis);
  s.geometry = std::move(geometry);
  s.grid = std::move(grid);
  s.freq_axis = std::move(freq_axis);
  s.source_distance = SourceDistance::plane_wave();
  s.convention = "plane wave exp(ik u.r)";
  return s;
}

SteeringSet make_steering(std::shared_ptr<const ArrayGeometry> geometry,
                          std::shared_ptr<const DirectionGrid> grid, SourceDistance distance,
                          std::shared_ptr<const FrequencyAxis> freq_axis) {
  if (distance.is_plane_wave()) {
    return plane_wave_steering(std::move(geometry), std::move(grid), std::move(freq_axis));
  }
  return point_source_steering(std::move(geometry), std::move(grid), distance.value(),
                               std::move(freq_axis));
}

HrtfSet free_field_ear_proxy(std::shared_ptr<const DirectionGrid> grid, SourceDistance distance,
                             std::shared_ptr<const FrequencyAxis> freq_axis, double ear_offset) {
  require_inputs(grid, freq_axis);
  if (!(ear_offset > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ear offset must be positive");
  const std::vector<Eigen::Vector3d> ears = {Eigen::Vector3d(0, ear_offset, 0),
                                             Eigen::Vector3d(0, -ear_offset, 0)};
  HrtfSet h;
  if (distance.is_plane_wave()) {
    h.data = plane_wave_transfer(ears, *grid, *freq_axis);
    h.convention = "free-field ear proxy, plane wave exp(ik u.r)";
  } else {
    if (!(distance.value() > ear_offset)) {
      throw Error(ErrorCode::kInvalidArgument, "source distance must exceed the ear offset");
    }
    h.data = point_source_transfer(ears, *grid, distance.value(), *freq_axis);
    h.convention = "free-field ear proxy, point source exp(-ikd)/(4 pi d)";
  }
  h.grid = std::move(grid);
  h.freq_axis = std::move(freq_axis);
  h.source_distance = distance;
  return h;
}

namespace {

void check_entries(const std::vector<Eigen::MatrixXcd>& data, std::vector<std::string>& out) {
  for (std::size_t f = 0; f < data.size(); ++f) {
    for (Eigen::Index c = 0; c < data[f].rows(); ++c) {
      for (Eigen::Index q = 0; q < data[f].cols(); ++q) {
        const cplx v = data[f](c, q);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          std::ostringstream os;
          os << "non-finite entry at [" << f << "][" << c << "][" << q << "]";
          out.push_back(os.str());
        }
      }
    }
  }
}

void check_shape(const std::vector<Eigen::MatrixXcd>& data, Eigen::Index rows, Eigen::Index cols,
                 std::vector<std::string>& out) {
  for (std::size_t f = 0; f < data.size(); ++f) {
    if (data[f].rows() != rows || data[f].cols() != cols) {
      std::ostringstream os;
      os << "dimension mismatch at frequency " << f << ": got " << data[f].rows() << "x"
         << data[f].cols() << ", expected " << rows << "x" << cols;
      out.push_back(os.str());
    }
  }
}

}  // namespace

std::vector<std::string> validate_steering(const SteeringSet& set) {
  std::vector<std::string> out;
  if (!set.geometry) out.emplace_back("missing geometry");
  if (!set.grid) out.emplace_back("missing grid");
  if (!set.freq_axis) out.emplace_back("missing frequency axis");
  if (!out.empty()) return out;
  if (set.data.size() != set.freq_axis->size()) {
    std::ostringstream os;
    os << "dimension mismatch: " << set.data.size() << " frequency slices, axis has "
       << set.freq_axis->size();
    out.push_back(os.str());
  }
  check_shape(set.data, static_cast<Eigen::Index>(set.geometry->size()),
              static_cast<Eigen::Index>(set.grid->size()), out);
  if (out.empty()) check_entries(set.data, out);
  return out;
}

std::vector<std::string> validate_hrtf(const HrtfSet& set) {
  std::vector<std::string> out;
  if (!set.grid) out.emplace_back("missing grid");
  if (!set.freq_axis) out.emplace_back("missing frequency axis");
  if (!out.empty()) return out;
  if (set.data.size() != set.freq_axis->size()) {
    std::ostringstream os;
    os << "dimension mismatch: " << set.data.size() << " frequency slices, axis has "
       << set.freq_axis->size();
    out.push_back(os.str());
  }
  check_shape(set.data, 2, static_cast<Eigen::Index>(set.grid->size()), out);
  if (out.empty()) check_entries(set.data, out);
  return out;
}

}  // namespace bsm
