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

// Umbrella header.

#include "bsmkit/core.hpp"
#include "bsmkit/design.hpp"
#include "bsmkit/dsp.hpp"
#include "bsmkit/error.hpp"
#include "bsmkit/io.hpp"
#include "bsmkit/metrics.hpp"
#include "bsmkit/parallel.hpp"
#include "bsmkit/scene.hpp"
#include "bsmkit/steering.hpp"
