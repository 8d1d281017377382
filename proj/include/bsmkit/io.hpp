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

// Persistent formats.
//
// Container file layout:
//   line 1   "BSMKIT-CONTAINER 1\n"
//   line 2   decimal byte length N of the manifest, then "\n"
//   N bytes  JSON manifest (human readable)
//   payload  little-endian IEEE-754 float64, interleaved (real, imag),
//            row-major over [F][channel][Q] (steering: channel = mic,
//            HRTF: channel = ear) or [F][ear][M] for filter banks.
// The manifest's "payload" object lists named blocks with byte offsets
// relative to the payload start, plus a CRC-32 of the whole payload.

#include <string>
#include <variant>

#include "bsmkit/core.hpp"
#include "bsmkit/design.hpp"
#include "bsmkit/metrics.hpp"

namespace bsm {

inline constexpr const char* kContainerMagic = "BSMKIT-CONTAINER 1";
inline constexpr int kSchemaVersion = 1;

void save_dataset(const SteeringSet& set, const std::string& path);
void save_dataset(const HrtfSet& set, const std::string& path);
void save_dataset(const BsmFilterBank& bank, const std::string& path);

using Dataset = std::variant<SteeringSet, HrtfSet, BsmFilterBank>;

/// Throws kSchemaUnknown, kDimsMismatch or kChecksumMismatch on malformed
/// files.
Dataset load_dataset(const std::string& path);

/// Typed loaders; throw kIncompatible when the file holds another kind.
SteeringSet load_steering(const std::string& path);
HrtfSet load_hrtf(const std::string& path);
BsmFilterBank load_filterbank(const std::string& path);

/// Byte offset of the payload inside a container file.
std::size_t container_payload_offset(const std::string& path);

/// Frequency table and per-direction table.
void export_report_csv(const MetricsReport& report, const std::string& freq_path,
                       const std::string& dir_path);

/// Parses files written by export_report_csv.
MetricsReport load_report_csv(const std::string& freq_path, const std::string& dir_path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace bsm
