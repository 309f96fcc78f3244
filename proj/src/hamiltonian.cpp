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

#include "qsep/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qsep/error.hpp"
#include "qsep/quadrature.hpp"

namespace qsep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kMinExplicit = 64;

}  // namespace

double WitnessLevels::coefficient(double t) const {
  const auto it = std::upper_bound(ends.begin(), ends.end(), t);
  const auto k = static_cast<std::size_t>(it - ends.begin());
  return coeffs[std::min(k, coeffs.size() - 1)];
}

HamiltonianSpec HamiltonianSpec::explicit_levels(std::vector<double> levels) {
  if (levels.empty()) throw InvalidArgument("hamiltonian: empty level list");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] >= 0.0)) throw InvalidArgument("hamiltonian: negative level");
    if (i > 0 && levels[i] < levels[i - 1]) throw InvalidArgument("hamiltonian: levels must be nondecreasing");
  }
  HamiltonianSpec h;
  h.kind_ = Kind::kExplicit;
  h.levels_ = std::move(levels);
  return h;
}

HamiltonianSpec HamiltonianSpec::log_power(double a, double p) {
  if (!(a > 0.0) || !(p > 0.0)) throw InvalidArgument("hamiltonian: log-power needs a > 0 and p > 0");
  HamiltonianSpec h;
  h.kind_ = Kind::kLogPower;
  h.a_ = a;
  h.p_ = p;
  return h;
}

HamiltonianSpec HamiltonianSpec::linear(double omega) {
  if (!(omega > 0.0)) throw InvalidArgument("hamiltonian: linear needs w > 0");
  HamiltonianSpec h;
  h.kind_ = Kind::kLinear;
  h.a_ = omega;
  return h;
}

HamiltonianSpec HamiltonianSpec::witness(std::shared_ptr<const WitnessLevels> levels) {
  if (!levels || levels->coeffs.empty() || levels->coeffs.size() != levels->ends.size() + 1) {
    throw InvalidArgument("hamiltonian: malformed witness levels");
  }
  HamiltonianSpec h;
  h.kind_ = Kind::kWitness;
  h.witness_ = std::move(levels);
  return h;
}

HamiltonianSpec HamiltonianSpec::with_offset(double offset) const {
  if (!(offset >= 0.0)) throw InvalidArgument("hamiltonian: offset must be nonnegative");
  if (power_ != 1.0) throw InvalidArgument("hamiltonian: offset must be applied before squaring");
  HamiltonianSpec h = *this;
  if (kind_ == Kind::kExplicit) {
    for (double& v : h.levels_) v += offset;
  } else {
    h.offset_ = offset;
  }
  return h;
}

HamiltonianSpec HamiltonianSpec::squared() const {
  HamiltonianSpec h = *this;
  if (kind_ == Kind::kExplicit) {
    for (double& v : h.levels_) v *= v;
  } else {
    h.power_ *= 2.0;
  }
  return h;
}

std::int64_t HamiltonianSpec::size() const {
  return kind_ == Kind::kExplicit ? static_cast<std::int64_t>(levels_.size()) : 0;
}

double HamiltonianSpec::base_at_log(double t) const {
  switch (kind_) {
    case Kind::kLogPower:
      return t <= 0.0 ? 0.0 : a_ * std::pow(t, p_);
    case Kind::kLinear:
      return a_ * std::expm1(t);
    case Kind::kWitness:
      return t <= 0.0 ? 0.0 : witness_->coefficient(t) * t * t;
    case Kind::kExplicit:
      break;
  }
  throw InvalidArgument("hamiltonian: explicit levels have no continuous extension");
}

double HamiltonianSpec::level_at_log(double t) const {
  const double v = offset_ + base_at_log(t);
  return power_ == 1.0 ? v : std::pow(v, power_);
}

double HamiltonianSpec::level(std::int64_t i) const {
  if (i < 1) throw InvalidArgument("hamiltonian: levels are 1-based");
  if (kind_ == Kind::kExplicit) {
    if (i > size()) throw InvalidArgument("hamiltonian: level index beyond explicit list");
    return levels_[static_cast<std::size_t>(i - 1)];
  }
  if (kind_ == Kind::kLinear) {
    const double v = offset_ + a_ * static_cast<double>(i - 1);
    return power_ == 1.0 ? v : std::pow(v, power_);
  }
  return level_at_log(std::log(static_cast<double>(i)));
}

std::vector<double> HamiltonianSpec::breakpoints() const {
  if (kind_ == Kind::kWitness) return witness_->ends;
  return {};
}

std::string HamiltonianSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::kExplicit:
      os << "explicit[" << levels_.size() << "]";
      break;
    case Kind::kLogPower:
      os << "hamlogp:a=" << a_ << ",p=" << p_;
      break;
    case Kind::kLinear:
      os << "hamlinear:w=" << a_;
      break;
    case Kind::kWitness:
      os << "witness[" << witness_->coeffs.size() << " blocks]";
      break;
  }
  if (offset_ != 0.0) os << "+" << offset_;
  if (power_ != 1.0) os << "^" << power_;
  return os.str();
}

bool PartitionSums::finite() const { return std::isfinite(log_z); }

PartitionSums partition_sums(const HamiltonianSpec& h, double beta, std::int64_t dim,
                             std::int64_t max_explicit) {
  if (!(beta >= 0.0)) throw InvalidArgument("partition_sums: beta must be nonnegative");
  if (dim < 0) throw InvalidArgument("partition_sums: negative dimension");
  if (h.is_finite() && (dim == 0 || dim > h.size())) dim = h.size();

  PartitionSums out;
  const double h1 = h.ground();
  // terms are scaled by e^{beta h1}; the first one is the largest
  double z = 0.0;
  double num = 0.0;
  std::int64_t i = 1;
  const std::int64_t limit = dim > 0 ? dim : std::max(max_explicit, kMinExplicit);
  for (; i <= limit; ++i) {
    const double hi = h.level(i);
    const double w = std::exp(-beta * (hi - h1));
    z += w;
    num += hi * w;
    if (dim == 0 && i >= kMinExplicit && w < 1e-14 * z) {
      ++i;
      break;
    }
  }
  out.explicit_terms = i - 1;

  double log_z = std::log(z);
  double log_num = num > 0.0 ? std::log(num) : -kInf;
  if (dim == 0) {
    if (beta == 0.0) {
      out.log_z = kInf;
      out.mean_energy = kInf;
      return out;
    }
    const double start = std::log(static_cast<double>(out.explicit_terms) + 0.5);
    const auto bps = h.breakpoints();
    auto phi_z = [&](double t) { return t - beta * (h.level_at_log(t) - h1); };
    auto phi_n = [&](double t) {
      const double v = h.level_at_log(t);
      return v > 0.0 ? t - beta * (v - h1) + std::log(v) : -kInf;
    };
    const double tail_z = log_integral_exp(phi_z, start, bps);
    if (!std::isfinite(tail_z) && tail_z > 0.0) {
      out.log_z = kInf;
      out.mean_energy = kInf;
      return out;
    }
    log_z = log_add(log_z, tail_z);
    log_num = log_add(log_num, log_integral_exp(phi_n, start, bps));
  }
  out.log_z = log_z - beta * h1;
  out.mean_energy = log_num == -kInf ? 0.0 : std::exp(log_num - log_z);
  return out;
}

}  // namespace qsep
