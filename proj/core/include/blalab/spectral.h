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

// Thin wrappers around FFTW for real periodic records.
//
// Conventions: the forward transform is unnormalized,
//   X[k] = sum_n x[n] exp(-j 2 pi k n / N),
// and returns the N/2 + 1 non-negative bins. The inverse carries the 1/N so
// that irfft(rfft(x), N) == x up to rounding.

#ifndef BLALAB_SPECTRAL_H_
#define BLALAB_SPECTRAL_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace blalab {

using Complex = std::complex<double>;

std::vector<Complex> rfft(std::span<const double> x);

// `spectrum` must hold n / 2 + 1 bins. The imaginary parts of the DC bin and,
// for even n, the Nyquist bin are ignored.
std::vector<double> irfft(std::span<const Complex> spectrum, std::size_t n);

// DFT of one period, picked at the given (non-negative, < n/2+1) bins.
std::vector<Complex> spectrum_at_bins(std::span<const double> period,
                                      std::span<const int> bins);

// Root-mean-square value of a sequence.
double rms(std::span<const double> x);

}  // namespace blalab

#endif  // BLALAB_SPECTRAL_H_
