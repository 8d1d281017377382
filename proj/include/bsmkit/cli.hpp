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

// Command-line front end. Exit codes: 0 success, 2 flag error, 3 data
// incompatibility or unreadable data, 4 numerical failure.

#include <string>
#include <vector>

#include "bsmkit/error.hpp"

namespace bsm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

int exit_code_for(ErrorCode code);

/// args excludes the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace bsm::cli
