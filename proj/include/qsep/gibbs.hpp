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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsep/hamiltonian.hpp"
#include "qsep/qmat.hpp"

namespace qsep {

struct GibbsSolution {
  double beta = 0.0;  // +inf at the ground energy
  double mean_energy = 0.0;
  double entropy = 0.0;
  double log_z = 0.0;
  /// Diagonal Gibbs state; present when the level count is finite and at
  /// most 4096.
  std::optional<DensityOp> state;
};

/// Gibbs state with mean energy E. dim = 0 uses all levels; dim > 0 the
/// first dim levels. Above the beta = 0 mean of a finite spectrum the
/// constraint is inactive and beta is clamped to 0.
GibbsSolution solve_beta(const HamiltonianSpec& h, double E, std::int64_t dim = 0);

DensityOp gibbs_state(const HamiltonianSpec& h, double beta, int dim);

double F_H(const HamiltonianSpec& h, double E, std::int64_t dim = 0);

/// Maximal entropy of a product state under sum_k Tr H_k rho_k <= E:
/// product of Gibbs states sharing one beta. dims may be empty (all 0).
GibbsSolution F_multi_solution(const std::vector<HamiltonianSpec>& hams, double E,
                               const std::vector<std::int64_t>& dims = {});
double F_multi(const std::vector<HamiltonianSpec>& hams, double E, const std::vector<std::int64_t>& dims = {});

enum class Growth { kLinear, kSqrt };

struct AsymptoticReport {
  std::vector<double> energies;
  std::vector<double> values;  // F_H(E)
  std::vector<double> ratios;  // F/E or F/sqrt(E)
  bool decreasing = false;
};

AsymptoticReport check_asymptotic_condition(const HamiltonianSpec& h, Growth which,
                                            const std::vector<double>& energies, std::int64_t dim = 0);

struct Lemma1Row {
  double E = 0.0;
  double f_squared = 0.0;  // F_{H^2}(E)
  double f_root = 0.0;     // F_H(sqrt E)
  bool holds = false;
};

std::vector<Lemma1Row> lemma1_check(const HamiltonianSpec& h, const std::vector<double>& energies,
                                    std::int64_t dim = 0);

struct BoundParams {
  double C = 0.0;
  double D = 0.0;
  int m = 1;
  double E = 0.0;
  std::vector<HamiltonianSpec> hams;
  std::int64_t trunc_dim = 0;
};

/// C x F[2mE/x^2] + D g(x) with x = sqrt(eps(2 - eps)); 0 at eps = 0.
double fcb_bound(const BoundParams& p, double eps);

using StateFunction = std::function<double(const DensityOp&)>;

struct MembershipSample {
  DensityOp rho;
  DensityOp sigma;
  double p = 0.5;
};

struct MembershipViolation {
  std::size_t sample = 0;
  std::string condition;
  double margin = 0.0;  // amount by which the inequality fails
};

struct MembershipReport {
  std::size_t checks = 0;
  std::vector<MembershipViolation> violations;
};

/// Samples both sandwich conditions of the L-class definition with
/// C_m(rho) = sum_{s < m} S(rho_s). Evidence only.
MembershipReport class_membership_check(const StateFunction& f, double c_minus, double c_plus, double d_minus,
                                        double d_plus, int m, const std::vector<MembershipSample>& samples);

}  // namespace qsep
