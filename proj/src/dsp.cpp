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

#include "bsmkit/dsp.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace bsm::dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::FFT<double>& half_engine() {
  thread_local Eigen::FFT<double> engine = [] {
    Eigen::FFT<double> e;
    e.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    return e;
  }();
  return engine;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x) {
  std::vector<std::complex<double>> out;
  const std::vector<double> in(x.begin(), x.end());
  half_engine().fwd(out, in);
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> half, std::size_t n) {
  std::vector<std::complex<double>> in(half.begin(), half.end());
  in.resize(n / 2 + 1);
  in.front() = in.front().real();
  if (n % 2 == 0) in.back() = in.back().real();
  std::vector<double> out;
  half_engine().inv(out, in, static_cast<Eigen::Index>(n));
  return out;
}

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x) {
  thread_local Eigen::FFT<double> engine;
  std::vector<std::complex<double>> out;
  const std::vector<std::complex<double>> in(x.begin(), x.end());
  engine.fwd(out, in);
  return out;
}

std::vector<double> sqrt_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
  }
  return w;
}

}  // namespace bsm::dsp
