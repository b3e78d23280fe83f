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

#include "blalab/polynomial.h"

#include <Eigen/Dense>
#include <algorithm>

#include "blalab/error.h"

namespace blalab {

int poly_degree(std::span<const double> c) {
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) {
    if (c[static_cast<std::size_t>(i)] != 0.0) return i;
  }
  return -1;
}

std::vector<double> poly_multiply(std::span<const double> a,
                                  std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

std::vector<double> poly_add(std::span<const double> a,
                             std::span<const double> b) {
  std::vector<double> out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

std::vector<double> poly_scale(std::span<const double> a, double s) {
  std::vector<double> out(a.begin(), a.end());
  for (double& v : out) v *= s;
  return out;
}

std::vector<double> poly_derivative(std::span<const double> c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> out(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) {
    out[i - 1] = static_cast<double>(i) * c[i];
  }
  return out;
}

std::vector<Complex> poly_roots(std::span<const double> c) {
  const int deg = poly_degree(c);
  if (deg < 0) throw NumericError("roots of the zero polynomial");
  std::vector<Complex> roots;
  if (deg == 0) return roots;
  const double lead = c[static_cast<std::size_t>(deg)];
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) {
    companion(i, deg - 1) = -c[static_cast<std::size_t>(i)] / lead;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("companion eigenvalue solver failed");
  }
  const auto& ev = solver.eigenvalues();
  roots.reserve(static_cast<std::size_t>(deg));
  for (int i = 0; i < deg; ++i) roots.push_back(ev(i));
  sort_roots(roots);
  return roots;
}

void sort_roots(std::vector<Complex>& roots) {
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

}  // namespace blalab
