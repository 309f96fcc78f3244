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
#include <optional>
#include <string>
#include <vector>

#include "qsep/hamiltonian.hpp"
#include "qsep/qmat.hpp"

namespace qsep {

enum class Verdict { kConverges, kDiverges, kInconclusive };

const char* to_string(Verdict v);

/// Nonincreasing probability sequence lambda_j, j = 1, 2, ...
class SpectrumFamily {
 public:
  enum class Kind { kExplicit, kGeometric, kPowerLog, kGibbs };

  /// Sorted into nonincreasing order and normalized.
  static SpectrumFamily explicit_list(std::vector<double> weights);
  /// lambda_j = (1 - q) q^{j-1}
  static SpectrumFamily geometric(double q);
  /// lambda_j = c / (x ln^q x (ln ln x)^p), x = j + i0 - 1.
  static SpectrumFamily power_log(double q, double p, int i0);
  /// lambda_j = e^{-beta h_j} / Z
  static SpectrumFamily gibbs(HamiltonianSpec h, double beta);

  Kind kind() const { return kind_; }
  double weight(std::int64_t j) const;
  double normalization() const { return norm_; }
  /// Number of nonzero entries for finite families.
  std::optional<std::int64_t> length() const;

  /// Integral-comparison class of sum_j lambda_j ln^k j.
  Verdict moment_class(double k) const;
  double partial_moment(std::int64_t n, double k) const;
  /// sum_{j > n} lambda_j ln^k j; +inf when the series diverges.
  double tail_moment(std::int64_t n, double k) const;
  /// sum_{j > e^t} lambda_j ln^k j, continuous in t.
  double tail_moment_log(double t, double k) const;

  double q() const { return q_; }
  double p() const { return p_; }
  int i0() const { return i0_; }
  const HamiltonianSpec* hamiltonian() const { return ham_ ? ham_.get() : nullptr; }
  double beta() const { return beta_; }

  std::string describe() const;

 private:
  SpectrumFamily() = default;
  double raw_powlog(double x) const;
  double powlog_integral(double x_from, double k) const;
  double gibbs_tail_integral(double t_from, double k) const;

  Kind kind_ = Kind::kExplicit;
  std::vector<double> weights_;
  double q_ = 0.0;
  double p_ = 0.0;
  int i0_ = 1;
  std::shared_ptr<const HamiltonianSpec> ham_;
  double beta_ = 0.0;
  double log_z_ = 0.0;
  double norm_ = 1.0;
};

struct SeriesCheck {
  Verdict verdict = Verdict::kInconclusive;
  double partial = 0.0;
};

/// sum lambda_j ln j < inf, i.e. finite entropy.
SeriesCheck check_entropy_criterion(const SpectrumFamily& s, std::int64_t n_max = 65536);

struct FACheck {
  SeriesCheck log_square;                                // sum lambda ln^2
  std::vector<std::pair<double, SeriesCheck>> log_power;  // sum lambda ln^q, q > 2
};

FACheck check_fa_sufficient(const SpectrumFamily& s, std::int64_t n_max = 65536,
                            const std::vector<double>& extra_q = {});

/// Sequence g_i >= 0 with g_1 = 0 and finite mean under the spectrum.
struct FAWitness {
  HamiltonianSpec hamiltonian;
  double energy = 0.0;

  double g(std::int64_t i) const { return hamiltonian.level(i); }
};

/// g_i = c_i ln^2 i with c_i constant on blocks where the remaining tail of
/// sum lambda ln^2 halves, growing by 2^0.9 per block.
FAWitness build_fa_witness(const SpectrumFamily& s, std::int64_t n_max = 65536);

/// Witness given directly by a Hamiltonian whose mean under s is finite.
FAWitness witness_from_hamiltonian(const SpectrumFamily& s, const HamiltonianSpec& h);

/// sum_j lambda_j h_j, +inf when divergent.
double mean_energy(const SpectrumFamily& s, const HamiltonianSpec& h);

struct ZetaResult {
  std::vector<double> betas;
  std::vector<double> values;  // [sum e^{-beta h_i}]^beta, +inf when divergent
  double extrapolated = 0.0;
};

std::vector<double> default_zeta_betas();

/// Values at each beta and the fit L + a beta + b beta ln beta through the
/// three smallest betas, evaluated at beta = 0.
ZetaResult zeta_limit(const HamiltonianSpec& h, const std::vector<double>& betas = default_zeta_betas(),
                      std::int64_t n_max = 65536);

struct TruncatedState {
  DensityOp state;
  double discarded = 0.0;
};

TruncatedState truncate_to_density(const SpectrumFamily& s, int d);

SpectrumFamily parse_spectrum(const std::string& literal);
HamiltonianSpec parse_hamiltonian(const std::string& literal);

}  // namespace qsep
