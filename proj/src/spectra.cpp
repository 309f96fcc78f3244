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

#include "qsep/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "qsep/error.hpp"
#include "qsep/quadrature.hpp"

namespace qsep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kPowlogHorizon = std::int64_t{1} << 18;
constexpr std::int64_t kGibbsHorizon = std::int64_t{1} << 16;
constexpr double kClassTol = 1e-12;

double log_pow(double j, double k) {
  if (k == 0.0) return 1.0;
  return std::pow(std::log(j), k);
}

std::int64_t floor_exp(double t) {
  if (t <= 0.0) return 1;
  if (t > 41.0) return std::int64_t{1} << 59;
  return static_cast<std::int64_t>(std::floor(std::exp(t)));
}

Verdict powlog_class(double s, double p) {
  if (std::abs(s) < kClassTol) return p > 1.0 ? Verdict::kConverges : Verdict::kDiverges;
  return s > 0.0 ? Verdict::kConverges : Verdict::kDiverges;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kConverges: return "converges";
    case Verdict::kDiverges: return "diverges";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

SpectrumFamily SpectrumFamily::explicit_list(std::vector<double> weights) {
  if (weights.empty()) throw InvalidArgument("spectrum: empty explicit list");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("spectrum: weights must be finite and nonnegative");
  }
  std::stable_sort(weights.begin(), weights.end(), std::greater<>());
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) throw InvalidArgument("spectrum: weights sum to zero");
  for (double& w : weights) w /= sum;
  while (weights.size() > 1 && weights.back() == 0.0) weights.pop_back();
  SpectrumFamily s;
  s.kind_ = Kind::kExplicit;
  s.weights_ = std::move(weights);
  return s;
}

SpectrumFamily SpectrumFamily::geometric(double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("spectrum: geometric ratio must lie in (0,1)");
  SpectrumFamily s;
  s.kind_ = Kind::kGeometric;
  s.q_ = q;
  return s;
}

SpectrumFamily SpectrumFamily::power_log(double q, double p, int i0) {
  if (!(q >= 0.0) || !(p >= 0.0)) throw InvalidArgument("spectrum: power-log exponents must be nonnegative");
  if (i0 < 2 || (p > 0.0 && i0 < 3)) throw InvalidArgument("spectrum: power-log start index too small");
  if (powlog_class(q - 1.0, p) != Verdict::kConverges) {
    throw InvalidArgument("spectrum: power-log family is not normalizable");
  }
  SpectrumFamily s;
  s.kind_ = Kind::kPowerLog;
  s.q_ = q;
  s.p_ = p;
  s.i0_ = i0;
  double sum = 0.0;
  for (std::int64_t j = kPowlogHorizon; j >= 1; --j) sum += s.raw_powlog(static_cast<double>(j + i0 - 1));
  sum += s.powlog_integral(std::log(static_cast<double>(kPowlogHorizon + i0 - 1) + 0.5), 0.0);
  s.norm_ = 1.0 / sum;
  return s;
}

SpectrumFamily SpectrumFamily::gibbs(HamiltonianSpec h, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("spectrum: gibbs family needs beta > 0");
  const PartitionSums sums = partition_sums(h, beta);
  if (!sums.finite()) throw InvalidArgument("spectrum: gibbs family is not normalizable");
  SpectrumFamily s;
  s.kind_ = Kind::kGibbs;
  s.beta_ = beta;
  s.log_z_ = sums.log_z;
  s.ham_ = std::make_shared<const HamiltonianSpec>(std::move(h));
  return s;
}

double SpectrumFamily::raw_powlog(double x) const {
  const double lx = std::log(x);
  double v = 1.0 / (x * std::pow(lx, q_));
  if (p_ != 0.0) v /= std::pow(std::log(lx), p_);
  return v;
}

// integral of raw(x) ln^k x over x > e^{lx}, by u = ln ln x
double SpectrumFamily::powlog_integral(double lx, double k) const {
  const double u0 = std::log(lx);
  const double s = q_ - 1.0 - k;
  if (powlog_class(s, p_) == Verdict::kDiverges) return kInf;
  if (std::abs(s) < kClassTol) return std::pow(u0, 1.0 - p_) / (p_ - 1.0);
  if (p_ == 0.0) return std::exp(-s * u0) / s;
  const double p = p_;
  return std::exp(log_integral_exp([s, p](double u) { return -s * u - p * std::log(u); }, u0));
}

double SpectrumFamily::gibbs_tail_integral(double t_from, double k) const {
  const HamiltonianSpec& h = *ham_;
  const double beta = beta_;
  const double log_z = log_z_;
  auto phi = [&](double t) {
    double v = t - beta * h.level_at_log(t) - log_z;
    if (k != 0.0) v += k * std::log(t);
    return v;
  };
  const double r = log_integral_exp(phi, std::max(t_from, 1e-300), h.breakpoints());
  return std::exp(r);
}

double SpectrumFamily::weight(std::int64_t j) const {
  if (j < 1) throw InvalidArgument("spectrum: indices are 1-based");
  switch (kind_) {
    case Kind::kExplicit:
      return j <= static_cast<std::int64_t>(weights_.size()) ? weights_[static_cast<std::size_t>(j - 1)] : 0.0;
    case Kind::kGeometric:
      return (1.0 - q_) * std::exp(static_cast<double>(j - 1) * std::log(q_));
    case Kind::kPowerLog:
      return norm_ * raw_powlog(static_cast<double>(j + i0_ - 1));
    case Kind::kGibbs:
      if (ham_->is_finite() && j > ham_->size()) return 0.0;
      return std::exp(-beta_ * ham_->level(j) - log_z_);
  }
  return 0.0;
}

std::optional<std::int64_t> SpectrumFamily::length() const {
  if (kind_ == Kind::kExplicit) return static_cast<std::int64_t>(weights_.size());
  if (kind_ == Kind::kGibbs && ham_->is_finite()) return ham_->size();
  return std::nullopt;
}

Verdict SpectrumFamily::moment_class(double k) const {
  switch (kind_) {
    case Kind::kExplicit:
      return Verdict::kInconclusive;
    case Kind::kGeometric:
      return Verdict::kConverges;
    case Kind::kPowerLog:
      return powlog_class(q_ - 1.0 - k, p_);
    case Kind::kGibbs:
      // any normalizable Gibbs family of a symbolic kind decays at least
      // like i^{-1-delta} for some delta > 0
      return ham_->is_finite() ? Verdict::kInconclusive : Verdict::kConverges;
  }
  return Verdict::kInconclusive;
}

double SpectrumFamily::partial_moment(std::int64_t n, double k) const {
  if (const auto len = length()) n = std::min(n, *len);
  double acc = 0.0;
  for (std::int64_t j = 1; j <= n; ++j) acc += weight(j) * log_pow(static_cast<double>(j), k);
  return acc;
}

double SpectrumFamily::tail_moment(std::int64_t n, double k) const {
  n = std::max<std::int64_t>(n, 0);
  if (const auto len = length()) {
    double acc = 0.0;
    for (std::int64_t j = *len; j > n; --j) acc += weight(j) * log_pow(static_cast<double>(j), k);
    return acc;
  }
  switch (kind_) {
    case Kind::kGeometric: {
      if (k == 0.0) return std::exp(static_cast<double>(n) * std::log(q_));
      const std::int64_t settle = n + 10 + static_cast<std::int64_t>(2.0 * k / -std::log(q_));
      double acc = 0.0;
      for (std::int64_t j = n + 1;; ++j) {
        const double term = weight(j) * log_pow(static_cast<double>(j), k);
        acc += term;
        if (term < 1e-300 || (j > settle && term < 1e-17 * acc)) break;
      }
      return acc;
    }
    case Kind::kPowerLog: {
      double acc = 0.0;
      for (std::int64_t j = kPowlogHorizon; j > n; --j) acc += weight(j) * log_pow(static_cast<double>(j), k);
      const double from = static_cast<double>(std::max(n, kPowlogHorizon) + i0_ - 1) + 0.5;
      const double tail = powlog_integral(std::log(from), k);
      return std::isfinite(tail) ? acc + norm_ * tail : kInf;
    }
    case Kind::kGibbs: {
      double acc = 0.0;
      std::int64_t j = n + 1;
      for (; j <= std::max(n, kGibbsHorizon); ++j) {
        const double term = weight(j) * log_pow(static_cast<double>(j), k);
        acc += term;
        if (j > n + 64 && term < 1e-17 * acc) break;
      }
      return acc + gibbs_tail_integral(std::log(static_cast<double>(j) + 0.5), k);
    }
    case Kind::kExplicit:
      break;
  }
  return 0.0;
}

double SpectrumFamily::tail_moment_log(double t, double k) const {
  switch (kind_) {
    case Kind::kPowerLog:
      if (t < std::log(static_cast<double>(kPowlogHorizon))) return tail_moment(floor_exp(t), k);
      return norm_ * powlog_integral(t + std::log1p((i0_ - 1) * std::exp(-t)), k);
    case Kind::kGibbs:
      if (!ham_->is_finite() && t >= std::log(static_cast<double>(kGibbsHorizon))) {
        return gibbs_tail_integral(t, k);
      }
      return tail_moment(floor_exp(t), k);
    case Kind::kGeometric:
      if (t > 41.0) return 0.0;
      return tail_moment(floor_exp(t), k);
    case Kind::kExplicit:
      return tail_moment(floor_exp(t), k);
  }
  return 0.0;
}

std::string SpectrumFamily::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::kExplicit: os << "explicit[" << weights_.size() << "]"; break;
    case Kind::kGeometric: os << "geometric:" << q_; break;
    case Kind::kPowerLog: os << "loglog:q=" << q_ << ",p=" << p_ << ",i0=" << i0_; break;
    case Kind::kGibbs: os << "gibbs:beta=" << beta_ << ";" << ham_->describe(); break;
  }
  return os.str();
}

SeriesCheck check_entropy_criterion(const SpectrumFamily& s, std::int64_t n_max) {
  return {s.moment_class(1.0), s.partial_moment(n_max, 1.0)};
}

FACheck check_fa_sufficient(const SpectrumFamily& s, std::int64_t n_max, const std::vector<double>& extra_q) {
  FACheck out;
  out.log_square = {s.moment_class(2.0), s.partial_moment(n_max, 2.0)};
  for (double q : extra_q) {
    if (!(q > 2.0)) throw InvalidArgument("check_fa_sufficient: extra exponents must exceed 2");
    out.log_power.emplace_back(q, SeriesCheck{s.moment_class(q), s.partial_moment(n_max, q)});
  }
  return out;
}

FAWitness build_fa_witness(const SpectrumFamily& s, std::int64_t n_max) {
  if (s.moment_class(2.0) != Verdict::kConverges) throw Error("no witness");
  constexpr double kGrowth = 0.9;
  constexpr int kMaxBlock = 1024;
  constexpr double kMaxCoeff = 1e200;
  constexpr double kMaxLogIndex = 1e15;
  auto coeff = [&](int k) { return std::min(std::exp2(kGrowth * k), kMaxCoeff); };

  const double total = s.tail_moment(0, 2.0);
  n_max = std::max<std::int64_t>(n_max, 2);
  auto block_of = [&](double remaining) {
    if (!(remaining > 0.0)) return kMaxBlock;
    const double b = 1.0 + std::floor(std::log2(total / remaining));
    return static_cast<int>(std::clamp(b, 1.0, static_cast<double>(kMaxBlock)));
  };

  // remaining[j] = sum_{i >= j} lambda_i ln^2 i
  std::vector<double> remaining(static_cast<std::size_t>(n_max) + 2, 0.0);
  remaining[static_cast<std::size_t>(n_max) + 1] = s.tail_moment(n_max, 2.0);
  for (std::int64_t j = n_max; j >= 1; --j) {
    const auto u = static_cast<std::size_t>(j);
    remaining[u] = remaining[u + 1] + s.weight(j) * log_pow(static_cast<double>(j), 2.0);
  }

  auto levels = std::make_shared<WitnessLevels>();
  double energy = 0.0;
  int block = block_of(remaining[1]);
  levels->coeffs.push_back(coeff(block));
  for (std::int64_t j = 2; j <= n_max; ++j) {
    const int b = std::max(block, block_of(remaining[static_cast<std::size_t>(j)]));
    if (b != block) {
      levels->ends.push_back(std::log(static_cast<double>(j) - 0.5));
      levels->coeffs.push_back(coeff(b));
      block = b;
    }
    energy += coeff(block) * s.weight(j) * log_pow(static_cast<double>(j), 2.0);
  }

  // continue the blocks analytically beyond the explicit region
  double t_prev = std::log(static_cast<double>(n_max) + 0.5);
  double rem_prev = remaining[static_cast<std::size_t>(n_max) + 1];
  while (block < kMaxBlock && rem_prev > 0.0) {
    const int next = block + 1;
    const double target = total * std::exp2(1.0 - next);
    if (rem_prev <= target) {
      block = next;
      levels->coeffs.back() = coeff(block);
      continue;
    }
    double lo = t_prev;
    double hi = std::max(2.0 * t_prev, t_prev + 1.0);
    while (hi < kMaxLogIndex && s.tail_moment_log(hi, 2.0) > target) {
      lo = hi;
      hi *= 2.0;
    }
    if (hi >= kMaxLogIndex) break;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (s.tail_moment_log(mid, 2.0) > target) lo = mid;
      else hi = mid;
    }
    const double rem = s.tail_moment_log(hi, 2.0);
    energy += coeff(block) * std::max(rem_prev - rem, 0.0);
    levels->ends.push_back(hi);
    levels->coeffs.push_back(coeff(next));
    block = next;
    t_prev = hi;
    rem_prev = rem;
  }
  energy += coeff(block) * rem_prev;
  if (!std::isfinite(energy)) throw Error("no witness");
  return {HamiltonianSpec::witness(std::move(levels)), energy};
}

double mean_energy(const SpectrumFamily& s, const HamiltonianSpec& h) {
  if (const auto len = s.length()) {
    if (h.is_finite() && h.size() < *len) throw InvalidArgument("mean_energy: Hamiltonian shorter than spectrum");
    double acc = 0.0;
    for (std::int64_t j = 1; j <= *len; ++j) acc += s.weight(j) * h.level(j);
    return acc;
  }
  if (h.is_finite()) throw InvalidArgument("mean_energy: finite Hamiltonian on infinite spectrum");
  double acc = 0.0;
  if (s.kind() == SpectrumFamily::Kind::kGeometric) {
    for (std::int64_t j = 1;; ++j) {
      const double term = s.weight(j) * h.level(j);
      acc += term;
      if (s.weight(j) < 1e-300 || (j > 64 && term < 1e-17 * acc)) return acc;
    }
  }
  for (std::int64_t j = 1; j <= kGibbsHorizon; ++j) acc += s.weight(j) * h.level(j);
  const double from = static_cast<double>(kGibbsHorizon) + 0.5;
  if (h.kind() == HamiltonianSpec::Kind::kLogPower && h.offset() == 0.0) {
    return acc + std::pow(h.a(), h.power()) * s.tail_moment(kGibbsHorizon, h.p() * h.power());
  }
  if (s.kind() == SpectrumFamily::Kind::kGibbs) {
    const HamiltonianSpec& hs = *s.hamiltonian();
    const double beta = s.beta();
    const double neg_log_z = std::log(s.weight(1)) + beta * hs.ground();
    auto phi = [&](double t) {
      const double v = h.level_at_log(t);
      return v > 0.0 ? t - beta * hs.level_at_log(t) + neg_log_z + std::log(v) : -kInf;
    };
    std::vector<double> bps = hs.breakpoints();
    const auto more = h.breakpoints();
    bps.insert(bps.end(), more.begin(), more.end());
    return acc + std::exp(log_integral_exp(phi, std::log(from), bps));
  }
  if (s.kind() == SpectrumFamily::Kind::kPowerLog && h.kind() == HamiltonianSpec::Kind::kLinear) return kInf;
  throw InvalidArgument("mean_energy: unsupported spectrum/Hamiltonian combination");
}

FAWitness witness_from_hamiltonian(const SpectrumFamily& s, const HamiltonianSpec& h) {
  if (h.ground() != 0.0) throw InvalidArgument("witness: g_1 must be zero");
  const double e = mean_energy(s, h);
  if (!std::isfinite(e)) throw Error("no witness");
  return {h, e};
}

std::vector<double> default_zeta_betas() { return {0.2, 0.1, 0.05, 0.02, 0.01}; }

ZetaResult zeta_limit(const HamiltonianSpec& h, const std::vector<double>& betas, std::int64_t n_max) {
  if (betas.size() < 3) throw InvalidArgument("zeta_limit: need at least three betas");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0) || (i > 0 && !(betas[i] < betas[i - 1]))) {
      throw InvalidArgument("zeta_limit: betas must be positive and strictly decreasing");
    }
  }
  ZetaResult out;
  out.betas = betas;
  bool divergent = false;
  for (double beta : betas) {
    const PartitionSums sums = partition_sums(h, beta, 0, n_max);
    const double v = sums.finite() ? std::exp(beta * sums.log_z) : kInf;
    divergent = divergent || !std::isfinite(v);
    out.values.push_back(v);
  }
  if (divergent) {
    out.extrapolated = kInf;
    return out;
  }
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  const std::size_t n = betas.size();
  for (int r = 0; r < 3; ++r) {
    const double beta = betas[n - 3 + static_cast<std::size_t>(r)];
    a(r, 0) = 1.0;
    a(r, 1) = beta;
    a(r, 2) = beta * std::log(beta);
    b(r) = out.values[n - 3 + static_cast<std::size_t>(r)];
  }
  out.extrapolated = a.colPivHouseholderQr().solve(b)(0);
  return out;
}

TruncatedState truncate_to_density(const SpectrumFamily& s, int d) {
  if (d < 1) throw InvalidArgument("truncate_to_density: d must be positive");
  std::vector<double> w(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) w[static_cast<std::size_t>(j)] = s.weight(j + 1);
  const double kept = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(kept > 0.0)) throw InvalidArgument("truncate_to_density: no weight kept");
  for (double& x : w) x /= kept;
  return {DensityOp::diagonal(DimSig({d}), w), std::max(0.0, 1.0 - kept)};
}

namespace {

std::pair<std::string, std::string> split_kind(const std::string& lit) {
  const auto pos = lit.find(':');
  if (pos == std::string::npos) throw InvalidArgument("literal '" + lit + "': missing ':'");
  return {lit.substr(0, pos), lit.substr(pos + 1)};
}

std::map<std::string, double> parse_args(const std::string& lit, const std::string& body) {
  std::map<std::string, double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("literal '" + lit + "': expected key=value, got '" + item + "'");
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("literal '" + lit + "': bad number in '" + item + "'");
    }
  }
  return out;
}

double need(const std::map<std::string, double>& args, const std::string& key, const std::string& lit) {
  const auto it = args.find(key);
  if (it == args.end()) throw InvalidArgument("literal '" + lit + "': missing '" + key + "'");
  return it->second;
}

double opt(const std::map<std::string, double>& args, const std::string& key, double fallback) {
  const auto it = args.find(key);
  return it == args.end() ? fallback : it->second;
}

std::vector<double> parse_list(const std::string& lit, const std::string& body) {
  try {
    return nlohmann::json::parse(body).get<std::vector<double>>();
  } catch (const std::exception&) {
    throw InvalidArgument("literal '" + lit + "': expected a JSON number list");
  }
}

}  // namespace

SpectrumFamily parse_spectrum(const std::string& lit) {
  const auto [kind, body] = split_kind(lit);
  if (kind == "explicit") return SpectrumFamily::explicit_list(parse_list(lit, body));
  if (kind == "geometric") {
    if (body.find('=') != std::string::npos) return SpectrumFamily::geometric(need(parse_args(lit, body), "q", lit));
    return SpectrumFamily::geometric(parse_args(lit, "q=" + body).at("q"));
  }
  if (kind == "powlog" || kind == "loglog") {
    const auto args = parse_args(lit, body);
    return SpectrumFamily::power_log(need(args, "q", lit), opt(args, "p", 0.0),
                                     static_cast<int>(opt(args, "i0", kind == "loglog" ? 16 : 2)));
  }
  if (kind == "gibbs") {
    const auto semi = body.find(';');
    if (semi == std::string::npos) throw InvalidArgument("literal '" + lit + "': expected gibbs:beta=B;<hamiltonian>");
    const auto args = parse_args(lit, body.substr(0, semi));
    return SpectrumFamily::gibbs(parse_hamiltonian(body.substr(semi + 1)), need(args, "beta", lit));
  }
  throw InvalidArgument("literal '" + lit + "': unknown spectrum kind '" + kind + "'");
}

HamiltonianSpec parse_hamiltonian(const std::string& lit) {
  const auto [kind, body] = split_kind(lit);
  if (kind == "hamexplicit") return HamiltonianSpec::explicit_levels(parse_list(lit, body));
  if (kind == "hamlogp") {
    const auto args = parse_args(lit, body);
    return HamiltonianSpec::log_power(need(args, "a", lit), need(args, "p", lit));
  }
  if (kind == "hamlinear") return HamiltonianSpec::linear(need(parse_args(lit, body), "w", lit));
  throw InvalidArgument("literal '" + lit + "': unknown Hamiltonian kind '" + kind + "'");
}

}  // namespace qsep
