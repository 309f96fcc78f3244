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

#include <optional>
#include <string>
#include <vector>

#include "qsep/gibbs.hpp"
#include "qsep/hamiltonian.hpp"
#include "qsep/qmat.hpp"
#include "qsep/spectra.hpp"

namespace qsep {

struct TruncationPlan {
  std::vector<int> subset;           // sorted party indices
  int r = 0;
  std::vector<Matrix> projectors;    // P_r^s, aligned with subset
  Matrix q;                          // product projector on the full space
  double c_r = 1.0;                  // Tr Q rho
  std::vector<double> discarded;     // Tr (I - P_r^s) rho_s, aligned with subset
};

TruncationPlan make_plan(const DensityOp& rho, std::vector<int> subset, int r);
/// Q rho Q / Tr Q rho for a fixed plan.
DensityOp apply_plan(const DensityOp& rho, const TruncationPlan& plan);

struct Truncation {
  DensityOp state;
  TruncationPlan plan;
};

Truncation lambda_map(const DensityOp& rho, std::vector<int> subset, int r);

/// Product of the channels P rho P + Tr((I - P) rho) tau_s over the subset,
/// tau_s the top eigenvector of rho_s.
DensityOp phi_channels_map(const DensityOp& rho, std::vector<int> subset, int r);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// lhs = Tr Q rho, rhs = 1 - sum_s Tr (I - P^s) rho_s.
InequalityCheck p_ineq_check(const TruncationPlan& plan, const DensityOp& rho);

struct GentleCheck {
  double distance = 0.0;  // || rho - Lambda(rho) ||_1
  double bound_q = 0.0;   // 2 sqrt(Tr (I - Q) rho)
  double bound_p = 0.0;   // 2 sqrt(sum_s Tr (I - P^s) rho_s)
  bool holds = false;
};

GentleCheck gentle_bound_check(const DensityOp& rho, std::vector<int> subset, int r);

/// Witness operator on party s, diagonal in the eigenbasis of rho_s with
/// levels g_1, g_2, ... matched to decreasing eigenvalues.
Matrix witness_operator(const DensityOp& rho, int party, const HamiltonianSpec& g);

/// lhs = sum_s Tr G_s [Lambda(rho)]_s, rhs = sum_s Tr G_s rho_s / c_r over
/// parties s = 0..witnesses.size()-1.
InequalityCheck energy_growth_check(const DensityOp& rho, const TruncationPlan& plan,
                                    const std::vector<HamiltonianSpec>& witnesses);

struct EnvelopeRow {
  int r = 0;
  double eps = 0.0;
  std::optional<double> y;
};

/// eps_r from tail sums of the marginal spectra; Y_r from the fcb bound with
/// the witnesses as Hamiltonians and mE = 2 E_S. Y_r is left undefined unless
/// eps_r^2 <= 1/2, which keeps c_r >= 1/2 and the truncated energy <= 2 E_S.
std::vector<EnvelopeRow> y_envelope(const std::vector<SpectrumFamily>& marginal_spectra,
                                    const std::vector<FAWitness>& witnesses, const BoundParams& bound,
                                    const std::vector<int>& r_grid);

struct LocalChannel {
  enum class Kind { kIdentity, kDepolarizing, kDephasing };
  Kind kind = Kind::kIdentity;
  double p = 0.0;

  static LocalChannel parse(const std::string& literal);
  std::string describe() const;
};

DensityOp apply_local_channel(const DensityOp& rho, int party, const LocalChannel& ch);
/// One channel per party; a single entry is applied to every party.
DensityOp apply_product_channel(const DensityOp& rho, const std::vector<LocalChannel>& channels);

std::vector<LocalChannel> channel_registry();

struct EnvelopeInputs {
  double C = 0.0;
  double D = 0.0;
  int m = 1;
  std::vector<HamiltonianSpec> witnesses;  // parties 0..m-1
};

struct ApproxRow {
  int r = 0;
  double c_r = 1.0;
  double eps_r = 0.0;
  double gentle_bound = 0.0;
  std::optional<double> y;
  double f_exact = 0.0;
  double f_trunc = 0.0;
  double diff = 0.0;
  bool holds = true;
};

struct ApproxReport {
  std::vector<ApproxRow> rows;
  std::size_t violations = 0;
};

ApproxReport theorem1_experiment(const DensityOp& rho, const StateFunction& f, const std::vector<int>& subset,
                                 const std::vector<int>& r_grid,
                                 const std::optional<EnvelopeInputs>& envelope = std::nullopt);

}  // namespace qsep
