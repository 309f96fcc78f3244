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

#include "qsep/entropy.hpp"

#include <cmath>

#include "qsep/error.hpp"

namespace qsep {

double eta(double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }

double entropy_of_spectrum(std::span<const double> probabilities) {
  double s = 0.0;
  for (double p : probabilities) s += eta(p);
  return s;
}

double von_neumann_entropy(const DensityOp& rho) {
  const RealVector w = eigvalsh(rho.mat());
  return entropy_of_spectrum(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("binary_entropy: p outside [0,1]");
  return eta(p) + eta(1.0 - p);
}

double g_func(double x) {
  if (!(x >= 0.0)) throw InvalidArgument("g_func: x must be nonnegative");
  if (x == 0.0) return 0.0;
  return (x + 1.0) * std::log1p(x) - x * std::log(x);
}

EntropyValue relative_entropy(const DensityOp& rho, const DensityOp& sigma) {
  if (!(rho.sig() == sigma.sig())) throw InvalidArgument("relative_entropy: signature mismatch");
  const Eigen::SelfAdjointEigenSolver<Matrix> rs(rho.mat());
  const Eigen::SelfAdjointEigenSolver<Matrix> ss(sigma.mat());
  const RealVector& lam = rs.eigenvalues();
  const RealVector& mu = ss.eigenvalues();
  const Matrix& u = ss.eigenvectors();
  const int n = static_cast<int>(mu.size());

  std::vector<int> null_cols;
  for (int i = 0; i < n; ++i) {
    if (mu(i) <= kNullEigenvalue) null_cols.push_back(i);
  }
  if (!null_cols.empty()) {
    for (int k = 0; k < n; ++k) {
      if (lam(k) <= kSupportTol) continue;
      double proj = 0.0;
      for (int i : null_cols) proj += std::norm(u.col(i).dot(rs.eigenvectors().col(k)));
      if (proj >= kSupportTol) return EntropyValue::infinite();
    }
  }
  double rho_log_rho = 0.0;
  for (int k = 0; k < n; ++k) rho_log_rho -= eta(lam(k));
  // Tr rho ln sigma in sigma's eigenbasis
  double rho_log_sigma = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mu(i) <= kNullEigenvalue) continue;
    const double diag = u.col(i).dot(rho.mat() * u.col(i)).real();
    rho_log_sigma += diag * std::log(mu(i));
  }
  return EntropyValue(rho_log_rho - rho_log_sigma);
}

double conditional_entropy_ext(const DensityOp& rho, int a_party) {
  if (rho.sig().parties() != 2) throw InvalidArgument("conditional_entropy_ext: state is not bipartite");
  if (a_party != 0 && a_party != 1) throw InvalidArgument("conditional_entropy_ext: party must be 0 or 1");
  const DensityOp ra = marginal(rho, 0);
  const DensityOp rb = marginal(rho, 1);
  const DensityOp prod = kron(ra, rb);
  const EntropyValue d = relative_entropy(rho, prod);
  const double s_a = von_neumann_entropy(a_party == 0 ? ra : rb);
  return s_a - d.value();
}

void validate_grouping(const std::vector<std::vector<int>>& groups, std::size_t parties) {
  if (groups.empty()) throw InvalidArgument("grouping is empty");
  std::vector<int> seen(parties, 0);
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidArgument("grouping contains an empty group");
    for (int s : g) {
      if (s < 0 || s >= static_cast<int>(parties)) throw InvalidArgument("grouping index out of range");
      if (seen[s]++) throw InvalidArgument("grouping is not disjoint");
    }
  }
  for (int c : seen) {
    if (c == 0) throw InvalidArgument("grouping does not cover every subsystem");
  }
}

double mutual_information(const DensityOp& rho, const std::vector<std::vector<int>>& groups) {
  validate_grouping(groups, rho.sig().parties());
  double sum = 0.0;
  for (const auto& g : groups) sum += von_neumann_entropy(partial_trace(rho, g));
  return sum - von_neumann_entropy(rho);
}

double mutual_information(const DensityOp& rho) {
  std::vector<std::vector<int>> groups;
  for (int s = 0; s < static_cast<int>(rho.sig().parties()); ++s) groups.push_back({s});
  return mutual_information(rho, groups);
}

}  // namespace qsep
