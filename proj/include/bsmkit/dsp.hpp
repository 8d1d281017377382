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

#include <complex>
#include <span>
#include <vector>

namespace bsm::dsp {

/// Forward real transform, n/2 + 1 bins, unscaled.
std::vector<std::complex<double>> rfft(std::span<const double> x);

/// Inverse of rfft for a length-n signal; scaled by 1/n. The imaginary parts
/// of the DC and Nyquist bins are ignored.
std::vector<double> irfft(std::span<const std::complex<double>> half, std::size_t n);

/// Full complex forward transform, unscaled.
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x);

/// Periodic Hann window of length n, square-rooted.
std::vector<double> sqrt_hann(std::size_t n);

}  // namespace bsm::dsp
