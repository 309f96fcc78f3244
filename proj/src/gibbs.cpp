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

#include "qsep/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qsep/entropy.hpp"
#include "qsep/error.hpp"

namespace qsep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kMaxStateDim = 4096;

struct Level {
  HamiltonianSpec h;
  std::int64_t count;  // 0 = infinite
};

std::int64_t level_count(const HamiltonianSpec& h, std::int64_t dim) {
  if (h.is_finite()) return dim > 0 ? std::min(dim, h.size()) : h.size();
  return dim;
}

std::int64_t ground_multiplicity(const HamiltonianSpec& h, std::int64_t count) {
  const double g = h.ground();
  std::int64_t k = 1;
  while ((count == 0 || k < count) && h.level(k + 1) == g) ++k;
  return k;
}

GibbsSolution solve_common(const std::vector<Level>& levels, double E) {
  double ground = 0.0;
  for (const auto& l : levels) ground += l.h.ground();
  if (!(E >= ground - 1e-12 * std::max(1.0, std::abs(ground)))) throw InvalidArgument("infeasible energy");

  GibbsSolution out;
  if (E <= ground + 1e-15 * std::max(1.0, std::abs(ground))) {
    out.beta = kInf;
    out.mean_energy = ground;
    for (const auto& l : levels) out.entropy += std::log(static_cast<double>(ground_multiplicity(l.h, l.count)));
    out.log_z = out.entropy;
    return out;
  }

  auto eval = [&](double beta) {
    PartitionSums total;
    total.log_z = 0.0;
    total.mean_energy = 0.0;
    for (const auto& l : levels) {
      const PartitionSums s = partition_sums(l.h, beta, l.count);
      if (!s.finite()) return PartitionSums{kInf, kInf, 0};
      total.log_z += s.log_z;
      total.mean_energy += s.mean_energy;
    }
    return total;
  };

  const bool all_finite = std::all_of(levels.begin(), levels.end(), [](const Level& l) { return l.count > 0; });
  if (all_finite) {
    const PartitionSums flat = eval(0.0);
    if (E >= flat.mean_energy) {
      out.beta = 0.0;
      out.mean_energy = flat.mean_energy;
      out.log_z = flat.log_z;
      out.entropy = flat.log_z;
      return out;
    }
  }

  double hi = 1.0;
  PartitionSums at_hi = eval(hi);
  while (at_hi.mean_energy > E) {
    hi *= 2.0;
    if (hi > 1e300) throw Error("solve_beta: failed to bracket beta");
    at_hi = eval(hi);
  }
  double lo = hi;
  if (all_finite) {
    lo = 0.0;
  } else {
    do {
      lo *= 0.5;
      if (lo < 1e-300) throw Error("solve_beta: failed to bracket beta");
    } while (eval(lo).mean_energy <= E);
  }

  PartitionSums best = at_hi;
  double beta = hi;
  const double tol = 1e-12 * std::max(1.0, std::abs(E));
  for (int it = 0; it < 400; ++it) {
    const double mid = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const PartitionSums s = eval(mid);
    if (s.mean_energy > E) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (std::abs(s.mean_energy - E) < std::abs(best.mean_energy - E)) {
      best = s;
      beta = mid;
    }
    if (std::abs(s.mean_energy - E) <= tol) break;
  }
  out.beta = beta;
  out.mean_energy = best.mean_energy;
  out.log_z = best.log_z;
  out.entropy = beta * best.mean_energy + best.log_z;
  return out;
}

}  // namespace

DensityOp gibbs_state(const HamiltonianSpec& h, double beta, int dim) {
  if (dim < 1) throw InvalidArgument("gibbs_state: dim must be positive");
  std::vector<double> w(static_cast<std::size_t>(dim));
  const double g = h.ground();
  for (int i = 0; i < dim; ++i) {
    const double e = h.level(i + 1) - g;
    w[static_cast<std::size_t>(i)] = std::isinf(beta) ? (e == 0.0 ? 1.0 : 0.0) : std::exp(-beta * e);
  }
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return DensityOp::diagonal(DimSig({dim}), w);
}

GibbsSolution solve_beta(const HamiltonianSpec& h, double E, std::int64_t dim) {
  if (h.ground() > E + 1e-12 * std::max(1.0, std::abs(E))) throw InvalidArgument("infeasible energy");
  const std::int64_t count = level_count(h, dim);
  GibbsSolution out = solve_common({Level{h, count}}, E);
  if (count > 0 && count <= kMaxStateDim) out.state = gibbs_state(h, out.beta, static_cast<int>(count));
  return out;
}

double F_H(const HamiltonianSpec& h, double E, std::int64_t dim) { return solve_beta(h, E, dim).entropy; }

GibbsSolution F_multi_solution(const std::vector<HamiltonianSpec>& hams, double E,
                               const std::vector<std::int64_t>& dims) {
  if (hams.empty()) throw InvalidArgument("F_multi: no Hamiltonians");
  if (!dims.empty() && dims.size() != hams.size()) throw InvalidArgument("F_multi: dims and hams differ in length");
  std::vector<Level> levels;
  for (std::size_t k = 0; k < hams.size(); ++k) {
    levels.push_back({hams[k], level_count(hams[k], dims.empty() ? 0 : dims[k])});
  }
  return solve_common(levels, E);
}

double F_multi(const std::vector<HamiltonianSpec>& hams, double E, const std::vector<std::int64_t>& dims) {
  return F_multi_solution(hams, E, dims).entropy;
}

AsymptoticReport check_asymptotic_condition(const HamiltonianSpec& h, Growth which,
                                            const std::vector<double>& energies, std::int64_t dim) {
  if (energies.empty()) throw InvalidArgument("check_asymptotic_condition: empty grid");
  AsymptoticReport out;
  out.energies = energies;
  out.decreasing = true;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double e = energies[i];
    if (!(e > 0.0) || (i > 0 && !(e > energies[i - 1]))) {
      throw InvalidArgument("check_asymptotic_condition: grid must be positive and increasing");
    }
    const double f = F_H(h, e, dim);
    out.values.push_back(f);
    out.ratios.push_back(which == Growth::kLinear ? f / e : f / std::sqrt(e));
    if (i > 0 && !(out.ratios[i] < out.ratios[i - 1])) out.decreasing = false;
  }
  return out;
}

std::vector<Lemma1Row> lemma1_check(const HamiltonianSpec& h, const std::vector<double>& energies,
                                    std::int64_t dim) {
  const HamiltonianSpec h2 = h.squared();
  const double e0 = h.ground();
  std::vector<Lemma1Row> rows;
  for (double e : energies) {
    if (e < e0 * e0) throw InvalidArgument("lemma1_check: energy below the squared ground level");
    Lemma1Row row;
    row.E = e;
    row.f_squared = F_H(h2, e, dim);
    row.f_root = F_H(h, std::sqrt(e), dim);
    row.holds = row.f_squared <= row.f_root + 1e-8;
    rows.push_back(row);
  }
  return rows;
}

double fcb_bound(const BoundParams& p, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("fcb_bound: eps must lie in [0,1]");
  if (!(p.C >= 0.0) || !(p.D >= 0.0)) throw InvalidArgument("fcb_bound: C and D must be nonnegative");
  if (p.m < 1 || p.hams.size() != static_cast<std::size_t>(p.m)) {
    throw InvalidArgument("fcb_bound: need exactly m Hamiltonians");
  }
  double ground = 0.0;
  for (const auto& h : p.hams) ground += h.ground();
  if (!(p.m * p.E > ground)) throw InvalidArgument("fcb_bound: E must exceed E0");
  if (eps == 0.0) return 0.0;
  const double x2 = eps * (2.0 - eps);
  const double x = std::sqrt(x2);
  double value = p.D * g_func(x);
  if (p.C > 0.0) {
    const std::vector<std::int64_t> dims(p.hams.size(), p.trunc_dim);
    value += p.C * x * F_multi(p.hams, 2.0 * p.m * p.E / x2, dims);
  }
  return value;
}

MembershipReport class_membership_check(const StateFunction& f, double c_minus, double c_plus, double d_minus,
                                        double d_plus, int m, const std::vector<MembershipSample>& samples) {
  constexpr double kSlack = 1e-8;
  MembershipReport report;
  auto c_m = [m](const DensityOp& rho) {
    if (m < 1 || static_cast<std::size_t>(m) > rho.sig().parties()) {
      throw InvalidArgument("class_membership_check: m exceeds the number of parties");
    }
    double acc = 0.0;
    for (int s = 0; s < m; ++s) acc += von_neumann_entropy(marginal(rho, s));
    return acc;
  };
  auto sandwich = [&](std::size_t idx, const DensityOp& state, const char* which) {
    const double v = f(state);
    const double c = c_m(state);
    report.checks += 2;
    if (-c_minus * c - v > kSlack) report.violations.push_back({idx, std::string("lower C_m bound on ") + which, -c_minus * c - v});
    if (v - c_plus * c > kSlack) report.violations.push_back({idx, std::string("upper C_m bound on ") + which, v - c_plus * c});
    return v;
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& smp = samples[i];
    if (!(smp.p >= 0.0 && smp.p <= 1.0)) throw InvalidArgument("class_membership_check: p must lie in [0,1]");
    const DensityOp mix = DensityOp::sanitized(smp.rho.sig(), smp.p * smp.rho.mat() + (1.0 - smp.p) * smp.sigma.mat());
    const double fr = sandwich(i, smp.rho, "rho");
    const double fs = sandwich(i, smp.sigma, "sigma");
    const double fm = sandwich(i, mix, "mixture");
    const double delta = fm - smp.p * fr - (1.0 - smp.p) * fs;
    const double h = binary_entropy(smp.p);
    report.checks += 2;
    if (-d_minus * h - delta > kSlack) report.violations.push_back({i, "lower mixing bound", -d_minus * h - delta});
    if (delta - d_plus * h > kSlack) report.violations.push_back({i, "upper mixing bound", delta - d_plus * h});
  }
  return report;
}

}  // namespace qsep
