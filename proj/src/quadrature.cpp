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

#include "qsep/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qsep {

namespace {

constexpr double kNegligible = 60.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a == kInf || b == kInf) return kInf;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_integral_exp(const std::function<double(double)>& phi, double a,
                        std::span<const double> breakpoints, double t_limit) {
  std::vector<double> bps;
  for (double b : breakpoints) {
    if (b > a && b < t_limit) bps.push_back(b);
  }
  std::sort(bps.begin(), bps.end());

  // scan grid
  std::vector<double> grid{a};
  std::vector<double> vals{phi(a)};
  double peak = vals.front();
  std::size_t next_bp = 0;
  int falling = 0;
  bool closed = false;
  while (true) {
    const double t = grid.back();
    double step = std::max(0.01 * std::abs(t), 0.02);
    double nt = t + step;
    if (next_bp < bps.size() && bps[next_bp] <= nt) nt = bps[next_bp++];
    if (nt > t_limit) break;
    const double v = phi(nt);
    if (std::isnan(v)) break;
    grid.push_back(nt);
    vals.push_back(v);
    falling = v < vals[vals.size() - 2] ? falling + 1 : 0;
    peak = std::max(peak, v);
    if (peak == kInf) return kInf;
    if (falling >= 3 && v < peak - kNegligible && next_bp >= bps.size()) {
      closed = true;
      break;
    }
    if (falling >= 3 && v < peak - kNegligible && next_bp < bps.size() && bps[next_bp] > nt) {
      // remaining breakpoints only matter if phi can recover; it is
      // nonincreasing past its peak for every Hamiltonian used here
      closed = true;
      break;
    }
  }
  if (!closed) return kInf;
  if (peak == -kInf) return -kInf;

  // refine the peak estimate inside the best grid cell
  const auto best = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  {
    double lo = grid[best > 0 ? best - 1 : 0];
    double hi = grid[std::min(best + 1, grid.size() - 1)];
    for (int it = 0; it < 60 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
      const double m1 = lo + (hi - lo) * 0.381966;
      const double m2 = lo + (hi - lo) * 0.618034;
      if (phi(m1) >= phi(m2)) hi = m2;
      else lo = m1;
    }
    const double v = phi(0.5 * (lo + hi));
    if (std::isfinite(v)) peak = std::max(peak, v);
  }

  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (std::max(vals[k], vals[k + 1]) < peak - 2.0 * kNegligible) continue;
    auto f = [&](double t) {
      const double v = phi(t) - peak;
      return v < -700.0 ? 0.0 : std::exp(v);
    };
    // nudge off the breakpoints so each panel sees one branch of phi
    const double width = grid[k + 1] - grid[k];
    const double lo = grid[k] + 1e-12 * width;
    const double hi = grid[k + 1] - 1e-12 * width;
    total += gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, 1e-12);
  }
  if (!(total > 0.0)) return -kInf;
  return peak + std::log(total);
}

}  // namespace qsep
