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
#include <memory>
#include <string>
#include <vector>

namespace qsep {

/// Piecewise-constant growth factors of an FA witness, indexed by t = ln i:
/// g(t) = coeffs[k] * t^2 for ends[k-1] <= t < ends[k], last coefficient
/// beyond the final end.
struct WitnessLevels {
  std::vector<double> ends;
  std::vector<double> coeffs;

  double coefficient(double t) const;
};

/// Diagonal positive operator H = sum_i h_i |i><i| with nondecreasing h.
/// Levels are 1-based. Symbolic kinds extend to a continuous h(t), t = ln x,
/// used for integral tails of partition sums.
class HamiltonianSpec {
 public:
  enum class Kind { kExplicit, kLogPower, kLinear, kWitness };

  static HamiltonianSpec explicit_levels(std::vector<double> levels);
  /// h_i = a ln^p i
  static HamiltonianSpec log_power(double a, double p);
  /// h_i = w (i - 1)
  static HamiltonianSpec linear(double omega);
  static HamiltonianSpec witness(std::shared_ptr<const WitnessLevels> levels);

  HamiltonianSpec with_offset(double offset) const;
  /// H^2 as a spec of the same kind.
  HamiltonianSpec squared() const;

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::kExplicit; }
  /// Number of levels of an explicit spec; 0 for symbolic kinds.
  std::int64_t size() const;

  double level(std::int64_t i) const;
  double level_at_log(double t) const;
  double ground() const { return level(1); }
  std::vector<double> breakpoints() const;

  double a() const { return a_; }
  double p() const { return p_; }
  double power() const { return power_; }
  double offset() const { return offset_; }

  std::string describe() const;

 private:
  HamiltonianSpec() = default;
  double base_at_log(double t) const;

  Kind kind_ = Kind::kExplicit;
  std::vector<double> levels_;
  std::shared_ptr<const WitnessLevels> witness_;
  double a_ = 0.0;
  double p_ = 0.0;
  double offset_ = 0.0;
  double power_ = 1.0;
};

struct PartitionSums {
  double log_z = 0.0;       // ln sum_i e^{-beta h_i}; +inf when divergent
  double mean_energy = 0.0;
  std::int64_t explicit_terms = 0;

  bool finite() const;
  double entropy(double beta) const { return beta * mean_energy + log_z; }
};

/// Partition function and mean energy at inverse temperature beta.
/// dim = 0 means all levels (symbolic kinds: explicit sum then integral
/// tail from K + 1/2); dim > 0 restricts to the first dim levels.
PartitionSums partition_sums(const HamiltonianSpec& h, double beta, std::int64_t dim = 0,
                             std::int64_t max_explicit = std::int64_t{1} << 16);

}  // namespace qsep
