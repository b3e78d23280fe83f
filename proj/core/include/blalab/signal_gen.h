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

// Random-phase multisine excitations.
//
// A realization is
//
//   u(t) = dc + std * sum_{k in K} a * cos(2 pi k f0 t + phi_k),
//   a = sqrt(2 / |K|),
//
// with phi_k i.i.d. uniform on [0, 2 pi). Because every excited harmonic lies
// strictly between DC and Nyquist, the per-period sample mean is exactly `dc`
// and the per-period (population) standard deviation is exactly `std`.

#ifndef BLALAB_SIGNAL_GEN_H_
#define BLALAB_SIGNAL_GEN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace blalab {

struct MultisineSpec {
  std::size_t n_samples = 0;  // samples per period (N)
  double fs = 1.0;            // Hz
  std::vector<int> excited_harmonics;
  double dc = 0.0;
  double std = 0.0;
  std::uint64_t seed = 0;

  // Throws ConfigError when an invariant is violated.
  void validate() const;

  double f0() const { return fs / static_cast<double>(n_samples); }
  double period_seconds() const { return static_cast<double>(n_samples) / fs; }
  std::vector<double> excited_frequencies() const;
};

class SignalRealization {
 public:
  const MultisineSpec& spec() const { return spec_; }
  std::span<const double> phases() const { return phases_; }
  const std::vector<double>& samples() const { return samples_; }
  std::size_t periods() const { return periods_; }

  std::span<const double> period(std::size_t p) const;

  // Zero-mean, unit-std waveform of one period.
  std::span<const double> unit_waveform() const { return unit_; }

  // One period evaluated on the grid t = n / (fs * factor), n = 0 ..
  // N*factor-1, by exact trigonometric interpolation of the multisine.
  std::vector<double> oversampled_period(int factor) const;

 private:
  friend SignalRealization realize_multisine(const MultisineSpec&,
                                             std::size_t);
  friend SignalRealization rescale(const SignalRealization&, double, double);

  SignalRealization(MultisineSpec spec, std::vector<double> phases,
                    std::vector<double> unit, std::size_t periods);

  MultisineSpec spec_;
  std::vector<double> phases_;
  std::vector<double> unit_;
  std::vector<double> samples_;
  std::size_t periods_ = 0;
};

// {first, first + step, ..., <= last}. Throws ConfigError on first <= 0,
// step < 1 or last < first.
std::vector<int> harmonic_grid(int first, int step, int last);

// Parses the "first:step:last" notation, or a comma separated list.
std::vector<int> parse_harmonics(const std::string& text);
std::string format_harmonics(std::span<const int> harmonics);

SignalRealization realize_multisine(const MultisineSpec& spec,
                                    std::size_t periods);

// Same phase draw with a new offset and standard deviation. Rejects going from
// std = 0 to std > 0 since the source then carries no waveform scale.
SignalRealization rescale(const SignalRealization& real, double dc,
                          double std);

}  // namespace blalab

#endif  // BLALAB_SIGNAL_GEN_H_
