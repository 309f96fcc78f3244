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
#include <string>
#include <vector>

#include "qsep/hamiltonian.hpp"
#include "qsep/qmat.hpp"

namespace qsep {

/// Disjoint nonempty groups of party indices covering 0..n-1. Groups are
/// kept sorted internally.
class Partition {
 public:
  explicit Partition(std::vector<std::vector<int>> groups);
  static Partition finest(int parties);
  static Partition single(int parties);

  const std::vector<std::vector<int>>& groups() const { return groups_; }
  std::size_t size() const { return groups_.size(); }
  int parties() const { return parties_; }
  /// Every group of this partition lies inside a group of `coarser`.
  bool refines(const Partition& coarser) const;
  std::string describe() const;

 private:
  std::vector<std::vector<int>> groups_;
  int parties_ = 0;
};

/// Product vector with one unit factor per partition group; a factor spans
/// the group's parties in increasing order.
struct SepAtom {
  std::vector<Vector> factors;

  /// Full vector in the original party order.
  Vector vector(const DimSig& sig, const Partition& pi) const;
};

struct WeightedAtom {
  double weight = 0.0;
  SepAtom atom;
};

struct LmoResult {
  SepAtom atom;
  double value = 0.0;
  double spread = 0.0;  // max - min over restarts
};

/// Alternating minimization of <psi|G|psi> over pi-product unit vectors.
/// Ties between restarts go to the lowest restart index.
LmoResult product_lmo(const Matrix& g, const DimSig& sig, const Partition& pi, int restarts = 8,
                      int max_sweeps = 50, std::uint64_t seed = 1);

struct SolverOptions {
  int max_iters = 1000;
  double tol = 1e-7;
  int restarts = 8;
  int max_sweeps = 50;
  int inner_steps = 10;
  std::uint64_t seed = 1;
};

struct ERSolution {
  double value = 0.0;   // D(rho || sigma), an upper estimate
  double gap = 0.0;     // Frank-Wolfe gap at sigma; heuristic (inexact LMO)
  DensityOp sigma = DensityOp::maximally_mixed(DimSig({1}));
  std::vector<WeightedAtom> atoms;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // objective after each iteration
  double restart_spread = 0.0;

  double lower_certificate() const { return value - std::max(gap, 0.0); }
};

/// Pairwise Frank-Wolfe on sigma -> D(rho || sigma) over finite mixtures of
/// pi-product pure states. `warm` replaces the default start when its
/// relative entropy is finite.
ERSolution relent_entanglement(const DensityOp& rho, const Partition& pi, const SolverOptions& opts = {},
                               const std::vector<WeightedAtom>* warm = nullptr);

/// rho^{(x)k} with the k copies of each party merged (party-major).
DensityOp tensor_power_regrouped(const DensityOp& rho, int k);

struct RegularizedPoint {
  int k = 0;
  double per_copy = 0.0;  // E_R(rho^k) / k
  double gap = 0.0;       // per copy
  int iterations = 0;
};

std::vector<RegularizedPoint> regularized_estimate(const DensityOp& rho, const Partition& pi, int k_max,
                                                   const SolverOptions& opts = {});

struct EnergyConstraint {
  std::vector<HamiltonianSpec> hams;  // one per party, first d_s levels used
  double E = 0.0;
};

Matrix total_hamiltonian(const DimSig& sig, const std::vector<HamiltonianSpec>& hams);

ERSolution energy_constrained_er(const DensityOp& rho, const Partition& pi, const EnergyConstraint& constraint,
                                 const SolverOptions& opts = {}, const std::vector<WeightedAtom>* warm = nullptr);

/// Solutions for increasing energies, each warm-started from the previous.
std::vector<ERSolution> energy_sweep(const DensityOp& rho, const Partition& pi,
                                     const std::vector<HamiltonianSpec>& hams, const std::vector<double>& energies,
                                     const SolverOptions& opts = {});

struct FdaRow {
  int k = 0;
  int m = 0;
  double c_k = 1.0;
  double value = 0.0;
  double gap = 0.0;
  double qmi_scaled = 0.0;  // c_k I(rho_k)
  double qmi = 0.0;         // I(rho)
  bool skipped = false;
  std::string note;
};

struct FdaReport {
  std::vector<FdaRow> rows;
  std::vector<std::pair<int, double>> last_change;  // (m, relative change of the last step)
  std::size_t violations = 0;                       // c_k I(rho_k) > I(rho) + 1e-8
};

/// projectors[k][s] is the projector of step k on party s.
FdaReport fda_experiment(const DensityOp& rho, const std::vector<std::vector<Matrix>>& projectors,
                         const std::vector<int>& m_grid, const SolverOptions& opts = {});

std::vector<std::vector<Matrix>> spectral_projector_sequence(const DensityOp& rho, const std::vector<int>& ranks);

struct InequalityResult {
  std::string name;
  double small_side = 0.0;
  double large_side = 0.0;
  double allowance = 0.0;  // solver gap carried by the small side
  bool violated = false;
};

inline constexpr double kInequalitySlack = 1e-6;

InequalityResult check_er_upper_bound(const DensityOp& rho, const Partition& pi, const SolverOptions& opts = {});
InequalityResult check_mixture_bound(const DensityOp& rho, const DensityOp& sigma, double p, const Partition& pi,
                                     const SolverOptions& opts = {});
InequalityResult check_conditional_lower_bound(const DensityOp& rho, const SolverOptions& opts = {});
InequalityResult check_pair_lower_bound(const DensityOp& pure3, int i, int j, const SolverOptions& opts = {});

struct MixtureSample {
  DensityOp rho;
  DensityOp sigma;
  double p = 0.5;
};

struct VerifySamples {
  std::vector<DensityOp> upper_bound;
  std::vector<MixtureSample> mixture;
  std::vector<DensityOp> conditional;
  std::vector<DensityOp> pure_tripartite;
};

struct VerifyReport {
  std::vector<InequalityResult> results;
  std::size_t violations = 0;
};

VerifyReport verify_er_inequalities(const VerifySamples& samples, const SolverOptions& opts = {});

struct Theorem2Row {
  int k = 0;  // 0 is the limit state
  double distance = 0.0;
  double qmi = 0.0;
  double er = 0.0;
  double er_reg = 0.0;
};

std::vector<DensityOp> depolarized_sequence(const DensityOp& rho0, int n);

std::vector<Theorem2Row> theorem2_demo(const std::vector<DensityOp>& sequence, const DensityOp& rho0,
                                       const Partition& pi, int k_max = 1, const SolverOptions& opts = {});

}  // namespace qsep
