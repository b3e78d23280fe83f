/*
 * Copyright 2026 The bla-lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "blalab/spectral.h"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "blalab/error.h"

namespace blalab {
namespace {

// FFTW planning is not thread safe but executing a plan on new arrays is.
// Plans are created once per (size, direction) and kept for the process
// lifetime.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan forward(std::size_t n) { return get(n, true); }
  fftw_plan backward(std::size_t n) { return get(n, false); }

 private:
  fftw_plan get(std::size_t n, bool forward) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(n, forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<double> real(n);
    std::vector<fftw_complex> cplx(n / 2 + 1);
    const int size = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan =
        forward ? fftw_plan_dft_r2c_1d(size, real.data(), cplx.data(), flags)
                : fftw_plan_dft_c2r_1d(size, cplx.data(), real.data(), flags);
    if (plan == nullptr) throw NumericError("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mu_;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

}  // namespace

std::vector<Complex> rfft(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<double> in(x.begin(), x.end());
  std::vector<Complex> out(n / 2 + 1);
  fftw_execute_dft_r2c(PlanCache::instance().forward(n), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> irfft(std::span<const Complex> spectrum, std::size_t n) {
  if (n == 0) return {};
  if (spectrum.size() != n / 2 + 1) {
    throw ConfigError("irfft: spectrum size does not match n/2+1");
  }
  // c2r overwrites its input.
  std::vector<Complex> in(spectrum.begin(), spectrum.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(PlanCache::instance().backward(n),
                       reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<Complex> spectrum_at_bins(std::span<const double> period,
                                      std::span<const int> bins) {
  const auto full = rfft(period);
  std::vector<Complex> out;
  out.reserve(bins.size());
  for (int k : bins) {
    if (k < 0 || static_cast<std::size_t>(k) >= full.size()) {
      throw ConfigError("spectrum_at_bins: bin outside [0, N/2]");
    }
    out.push_back(full[static_cast<std::size_t>(k)]);
  }
  return out;
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace blalab
