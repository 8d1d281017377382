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

// Analytic steering and HRTF generators plus validation of ingested data.

#include <string>
#include <vector>

#include "bsmkit/core.hpp"

namespace bsm {

/// Free-field point source at (r_s, direction q):
///   V[f](m, q) = exp(-i k d) / (4 pi d),  d = |r_s u_q - mic_m|.
/// Throws kInvalidArgument unless r_s exceeds the largest mic radius and
/// kSourceInsideArray if any source-mic distance falls below 1 mm.
SteeringSet point_source_steering(std::shared_ptr<const ArrayGeometry> geometry,
                                  std::shared_ptr<const DirectionGrid> grid, double r_s,
                                  std::shared_ptr<const FrequencyAxis> freq_axis);

/// Plane wave arriving from direction q: V[f](m, q) = exp(i k u_q . mic_m).
SteeringSet plane_wave_steering(std::shared_ptr<const ArrayGeometry> geometry,
                                std::shared_ptr<const DirectionGrid> grid,
                                std::shared_ptr<const FrequencyAxis> freq_axis);

/// Dispatches on the distance marker.
SteeringSet make_steering(std::shared_ptr<const ArrayGeometry> geometry,
                          std::shared_ptr<const DirectionGrid> grid, SourceDistance distance,
                          std::shared_ptr<const FrequencyAxis> freq_axis);

/// Synthetic HRTF stand-in: the same free-field transfer evaluated at two
/// points (0, +ear_offset, 0) for the left ear and (0, -ear_offset, 0) for the
/// right ear. No head scattering.
HrtfSet free_field_ear_proxy(std::shared_ptr<const DirectionGrid> grid, SourceDistance distance,
                             std::shared_ptr<const FrequencyAxis> freq_axis,
                             double ear_offset = 0.09);

/// Empty result means valid. Each entry names one violation.
std::vector<std::string> validate_steering(const SteeringSet& set);
std::vector<std::string> validate_hrtf(const HrtfSet& set);

}  // namespace bsm
