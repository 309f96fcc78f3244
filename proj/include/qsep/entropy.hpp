// Copyright 2026 The qsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Entropic functionals in nats.

#include <limits>
#include <span>
#include <vector>

#include "qsep/qmat.hpp"

namespace qsep {

/// Finite real or +infinity. Infinity is stored as IEEE +inf and is never
/// produced by overflow of a finite computation.
class EntropyValue {
 public:
  constexpr EntropyValue() = default;
  constexpr explicit EntropyValue(double v) : v_(v) {}
  static constexpr EntropyValue infinite() { return EntropyValue(std::numeric_limits<double>::infinity()); }

  constexpr bool is_finite() const { return v_ != std::numeric_limits<double>::infinity(); }
  constexpr double value() const { return v_; }

 private:
  double v_ = 0.0;
};

/// eta(x) = -x ln x, eta(0) = 0.
double eta(double x);
double entropy_of_spectrum(std::span<const double> probabilities);
double von_neumann_entropy(const DensityOp& rho);

double binary_entropy(double p);
/// g(x) = (x+1) ln(x+1) - x ln x, g(0) = 0.
double g_func(double x);

/// Support test threshold on squared projections.
inline constexpr double kSupportTol = 1e-9;
/// Eigenvalues of sigma at or below this count as its null space.
inline constexpr double kNullEigenvalue = 1e-14;

/// D(rho||sigma), +infinity when supp rho is not inside supp sigma.
EntropyValue relative_entropy(const DensityOp& rho, const DensityOp& sigma);

/// S(A|B) = S(rho_A) - D(rho || rho_A (x) rho_B) on a bipartite state.
/// `a_party` selects which party plays A (0 or 1).
double conditional_entropy_ext(const DensityOp& rho, int a_party = 0);

/// Sum of group entropies minus S(rho). Groups are merged subsystems and
/// must partition {0..n-1}.
double mutual_information(const DensityOp& rho, const std::vector<std::vector<int>>& groups);
/// Finest grouping {{0},{1},...}.
double mutual_information(const DensityOp& rho);

void validate_grouping(const std::vector<std::vector<int>>& groups, std::size_t parties);

}  // namespace qsep
