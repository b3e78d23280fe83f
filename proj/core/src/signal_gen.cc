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

#include "blalab/signal_gen.h"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "blalab/error.h"
#include "blalab/spectral.h"

namespace blalab {
namespace {

// Zero-mean unit-std waveform on a grid of `n_grid` points per period. The
// factor n_grid/2 undoes the 1/n_grid of irfft so that each cosine has
// amplitude `a`.
std::vector<double> unit_waveform_on_grid(const MultisineSpec& spec,
                                          std::span<const double> phases,
                                          std::size_t n_grid) {
  const double a =
      std::sqrt(2.0 / static_cast<double>(spec.excited_harmonics.size()));
  std::vector<Complex> spectrum(n_grid / 2 + 1, Complex(0.0, 0.0));
  const double half = 0.5 * static_cast<double>(n_grid);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const auto k = static_cast<std::size_t>(spec.excited_harmonics[i]);
    spectrum[k] = std::polar(half * a, phases[i]);
  }
  return irfft(spectrum, n_grid);
}

}  // namespace

void MultisineSpec::validate() const {
  if (n_samples < 3) throw ConfigError("multisine: N must be at least 3");
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw ConfigError("multisine: fs must be positive");
  }
  if (excited_harmonics.empty()) {
    throw ConfigError("multisine: no excited harmonics");
  }
  int prev = 0;
  for (int k : excited_harmonics) {
    if (k <= prev) {
      throw ConfigError(
          "multisine: excited harmonics must be strictly increasing and "
          "positive");
    }
    if (2 * static_cast<std::size_t>(k) >= n_samples) {
      throw ConfigError(fmt::format(
          "multisine: harmonic {} is not below Nyquist for N = {}", k,
          n_samples));
    }
    prev = k;
  }
  if (!(std >= 0.0) || !std::isfinite(std)) {
    throw ConfigError("multisine: std must be non-negative");
  }
  if (!std::isfinite(dc)) throw ConfigError("multisine: dc must be finite");
}

std::vector<double> MultisineSpec::excited_frequencies() const {
  std::vector<double> f;
  f.reserve(excited_harmonics.size());
  for (int k : excited_harmonics) f.push_back(k * f0());
  return f;
}

SignalRealization::SignalRealization(MultisineSpec spec,
                                     std::vector<double> phases,
                                     std::vector<double> unit,
                                     std::size_t periods)
    : spec_(std::move(spec)),
      phases_(std::move(phases)),
      unit_(std::move(unit)),
      periods_(periods) {
  const std::size_t n = spec_.n_samples;
  samples_.resize(n * periods_);
  for (std::size_t i = 0; i < n; ++i) {
    samples_[i] = spec_.dc + spec_.std * unit_[i];
  }
  for (std::size_t p = 1; p < periods_; ++p) {
    std::copy_n(samples_.begin(), n, samples_.begin() + p * n);
  }
}

std::span<const double> SignalRealization::period(std::size_t p) const {
  if (p >= periods_) throw ConfigError("period index out of range");
  return std::span<const double>(samples_).subspan(p * spec_.n_samples,
                                                   spec_.n_samples);
}

std::vector<double> SignalRealization::oversampled_period(int factor) const {
  if (factor < 1) throw ConfigError("oversampling factor must be >= 1");
  if (factor == 1) {
    auto p = period(0);
    return {p.begin(), p.end()};
  }
  auto unit = unit_waveform_on_grid(
      spec_, phases_, spec_.n_samples * static_cast<std::size_t>(factor));
  for (double& v : unit) v = spec_.dc + spec_.std * v;
  return unit;
}

std::vector<int> harmonic_grid(int first, int step, int last) {
  if (first <= 0) throw ConfigError("harmonic grid: first must be >= 1");
  if (step < 1) throw ConfigError("harmonic grid: step must be >= 1");
  if (last < first) throw ConfigError("harmonic grid: last < first");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>((last - first) / step + 1));
  for (int k = first; k <= last; k += step) out.push_back(k);
  return out;
}

std::vector<int> parse_harmonics(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("cannot parse harmonics '{}'", text));
    }
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) {
    const auto b = item.find_first_not_of(" \t[]");
    const auto e = item.find_last_not_of(" \t[]");
    parts.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  if (sep == ':') {
    if (parts.size() == 2) {
      return harmonic_grid(to_int(parts[0]), 1, to_int(parts[1]));
    }
    if (parts.size() != 3) {
      throw ConfigError(fmt::format("cannot parse harmonics '{}'", text));
    }
    return harmonic_grid(to_int(parts[0]), to_int(parts[1]),
                         to_int(parts[2]));
  }
  std::vector<int> out;
  for (const auto& p : parts) out.push_back(to_int(p));
  return out;
}

std::string format_harmonics(std::span<const int> harmonics) {
  if (harmonics.size() >= 3) {
    const int step = harmonics[1] - harmonics[0];
    bool uniform = step > 0;
    for (std::size_t i = 1; uniform && i < harmonics.size(); ++i) {
      uniform = harmonics[i] - harmonics[i - 1] == step;
    }
    if (uniform) {
      return fmt::format("{}:{}:{}", harmonics.front(), step,
                         harmonics.back());
    }
  }
  return fmt::format("{}", fmt::join(harmonics, ","));
}

SignalRealization realize_multisine(const MultisineSpec& spec,
                                    std::size_t periods) {
  spec.validate();
  if (periods < 1) throw ConfigError("multisine: periods must be >= 1");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<double> phases(spec.excited_harmonics.size());
  for (double& p : phases) p = phase(rng);
  auto unit = unit_waveform_on_grid(spec, phases, spec.n_samples);
  return SignalRealization(spec, std::move(phases), std::move(unit), periods);
}

SignalRealization rescale(const SignalRealization& real, double dc,
                          double std) {
  if (real.spec().std == 0.0 && std > 0.0) {
    throw ConfigError("rescale: cannot rescale a zero-std realization");
  }
  MultisineSpec spec = real.spec();
  spec.dc = dc;
  spec.std = std;
  spec.validate();
  return SignalRealization(spec, real.phases_, real.unit_, real.periods_);
}

}  // namespace blalab
