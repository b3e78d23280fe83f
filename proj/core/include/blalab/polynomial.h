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

// Real polynomials stored with ascending powers: c[0] + c[1] x + ... .

#ifndef BLALAB_POLYNOMIAL_H_
#define BLALAB_POLYNOMIAL_H_

#include <complex>
#include <span>
#include <vector>

namespace blalab {

using Complex = std::complex<double>;

template <typename T>
T polyval(std::span<const double> c, T x) {
  T acc(0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + T(*it);
  return acc;
}

// Degree ignoring trailing zero coefficients; -1 for the zero polynomial.
int poly_degree(std::span<const double> c);

std::vector<double> poly_multiply(std::span<const double> a,
                                  std::span<const double> b);
std::vector<double> poly_add(std::span<const double> a,
                             std::span<const double> b);
std::vector<double> poly_scale(std::span<const double> a, double s);
std::vector<double> poly_derivative(std::span<const double> c);

// Roots from the eigenvalues of the companion matrix of the monic polynomial.
// Complex roots come in exact conjugate pairs. Returned in canonical order.
std::vector<Complex> poly_roots(std::span<const double> c);

// Canonical ordering used for every root comparison: by real part, then by
// imaginary part.
void sort_roots(std::vector<Complex>& roots);

}  // namespace blalab

#endif  // BLALAB_POLYNOMIAL_H_
