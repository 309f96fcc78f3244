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

#include "qsep/approx.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qsep/entropy.hpp"
#include "qsep/error.hpp"

namespace qsep {

namespace {

struct PartyLayout {
  int dim = 1;
  int stride = 1;  // index step of the party's digit
};

PartyLayout layout_of(const DimSig& sig, int party) {
  PartyLayout l;
  l.dim = sig.dim(static_cast<std::size_t>(party));
  for (std::size_t t = static_cast<std::size_t>(party) + 1; t < sig.parties(); ++t) l.stride *= sig.dim(t);
  return l;
}

int digit(int index, const PartyLayout& l) { return (index / l.stride) % l.dim; }

std::vector<int> checked_subset(std::vector<int> subset, const DimSig& sig) {
  if (subset.empty()) throw InvalidArgument("truncation: empty subset");
  std::sort(subset.begin(), subset.end());
  if (std::adjacent_find(subset.begin(), subset.end()) != subset.end()) {
    throw InvalidArgument("truncation: repeated party in subset");
  }
  for (int s : subset) {
    if (s < 0 || static_cast<std::size_t>(s) >= sig.parties()) throw InvalidArgument("truncation: party out of range");
  }
  return subset;
}

// tau (x) Tr_s(m) with tau placed on party s
Matrix replace_party(const Matrix& m, const DimSig& sig, int party, const Matrix& tau) {
  const PartyLayout l = layout_of(sig, party);
  const int n = sig.total();
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int bi = i - digit(i, l) * l.stride;
    for (int j = 0; j < n; ++j) {
      const int bj = j - digit(j, l) * l.stride;
      Complex acc = 0.0;
      for (int k = 0; k < l.dim; ++k) acc += m(bi + k * l.stride, bj + k * l.stride);
      out(i, j) = tau(digit(i, l), digit(j, l)) * acc;
    }
  }
  return out;
}

// rank-min(r, d) spectral projector of a marginal and the weight it discards
void local_truncation(const DensityOp& rs, int r, Matrix& p, double& tail) {
  const int d = rs.dim();
  if (r >= d) {
    p = Matrix::Identity(d, d);
    tail = 0.0;
    return;
  }
  const SpectralDecomp dec = eigh(rs.mat());
  p = top_projector(dec, r);
  tail = std::max(0.0, dec.values.tail(d - r).sum());
}

}  // namespace

TruncationPlan make_plan(const DensityOp& rho, std::vector<int> subset, int r) {
  const DimSig& sig = rho.sig();
  TruncationPlan plan;
  plan.subset = checked_subset(std::move(subset), sig);
  plan.r = r;
  int max_dim = 0;
  for (int s : plan.subset) max_dim = std::max(max_dim, sig.dim(static_cast<std::size_t>(s)));
  if (r < 1 || r > max_dim) throw InvalidArgument("truncation: r must lie in [1, max local dimension]");

  std::vector<Matrix> factors;
  std::size_t next = 0;
  for (std::size_t s = 0; s < sig.parties(); ++s) {
    if (next < plan.subset.size() && plan.subset[next] == static_cast<int>(s)) {
      Matrix p;
      double tail = 0.0;
      local_truncation(marginal(rho, static_cast<int>(s)), r, p, tail);
      plan.discarded.push_back(tail);
      plan.projectors.push_back(p);
      factors.push_back(std::move(p));
      ++next;
    } else {
      factors.push_back(Matrix::Identity(sig.dim(s), sig.dim(s)));
    }
  }
  plan.q = kron_all(factors);
  plan.c_r = (plan.q * rho.mat()).trace().real();
  if (!(plan.c_r > 1e-12)) throw Error("truncation annihilates state");
  return plan;
}

DensityOp apply_plan(const DensityOp& rho, const TruncationPlan& plan) {
  const Matrix m = plan.q * rho.mat() * plan.q;
  const double c = m.trace().real();
  if (!(c > 1e-12)) throw Error("truncation annihilates state");
  return DensityOp::sanitized(rho.sig(), m / c);
}

Truncation lambda_map(const DensityOp& rho, std::vector<int> subset, int r) {
  TruncationPlan plan = make_plan(rho, std::move(subset), r);
  DensityOp state = apply_plan(rho, plan);
  return {std::move(state), std::move(plan)};
}

DensityOp phi_channels_map(const DensityOp& rho, std::vector<int> subset, int r) {
  const DimSig& sig = rho.sig();
  subset = checked_subset(std::move(subset), sig);
  Matrix m = rho.mat();
  for (int s : subset) {
    const DensityOp rs = marginal(rho, s);
    if (r < 1) throw InvalidArgument("truncation: r must be positive");
    if (r >= rs.dim()) continue;
    const SpectralDecomp dec = eigh(rs.mat());
    const Matrix p = top_projector(dec, r);
    const Matrix tau = dec.vectors.col(0) * dec.vectors.col(0).adjoint();
    const Matrix pf = embed_local(p, sig, s);
    const Matrix pbar = embed_local(Matrix::Identity(rs.dim(), rs.dim()) - p, sig, s);
    m = pf * m * pf + replace_party(pbar * m * pbar, sig, s, tau);
  }
  return DensityOp::sanitized(sig, m);
}

InequalityCheck p_ineq_check(const TruncationPlan& plan, const DensityOp& rho) {
  InequalityCheck out;
  out.lhs = (plan.q * rho.mat()).trace().real();
  out.rhs = 1.0;
  for (double d : plan.discarded) out.rhs -= d;
  out.holds = out.lhs >= out.rhs - 1e-10;
  return out;
}

GentleCheck gentle_bound_check(const DensityOp& rho, std::vector<int> subset, int r) {
  const Truncation t = lambda_map(rho, std::move(subset), r);
  GentleCheck out;
  out.distance = trace_norm(rho.mat() - t.state.mat());
  out.bound_q = 2.0 * std::sqrt(std::max(0.0, 1.0 - t.plan.c_r));
  double tails = 0.0;
  for (double d : t.plan.discarded) tails += d;
  out.bound_p = 2.0 * std::sqrt(tails);
  out.holds = out.distance <= out.bound_q + 1e-8 && out.distance <= out.bound_p + 1e-8;
  return out;
}

Matrix witness_operator(const DensityOp& rho, int party, const HamiltonianSpec& g) {
  const DensityOp rs = marginal(rho, party);
  const SpectralDecomp dec = eigh(rs.mat());
  RealVector levels(rs.dim());
  for (int i = 0; i < rs.dim(); ++i) levels(i) = g.level(i + 1);
  return dec.vectors * levels.cast<Complex>().asDiagonal() * dec.vectors.adjoint();
}

InequalityCheck energy_growth_check(const DensityOp& rho, const TruncationPlan& plan,
                                    const std::vector<HamiltonianSpec>& witnesses) {
  if (witnesses.size() > rho.sig().parties()) throw InvalidArgument("energy_growth_check: too many witnesses");
  const DensityOp trunc = apply_plan(rho, plan);
  InequalityCheck out;
  for (std::size_t s = 0; s < witnesses.size(); ++s) {
    const int party = static_cast<int>(s);
    const Matrix g = witness_operator(rho, party, witnesses[s]);
    out.lhs += (g * marginal(trunc, party).mat()).trace().real();
    out.rhs += (g * marginal(rho, party).mat()).trace().real();
  }
  out.rhs /= plan.c_r;
  out.holds = out.lhs <= out.rhs + 1e-8 * std::max(1.0, out.rhs);
  return out;
}

std::vector<EnvelopeRow> y_envelope(const std::vector<SpectrumFamily>& marginal_spectra,
                                    const std::vector<FAWitness>& witnesses, const BoundParams& bound,
                                    const std::vector<int>& r_grid) {
  if (marginal_spectra.empty()) throw InvalidArgument("y_envelope: no marginal spectra");
  if (witnesses.size() != static_cast<std::size_t>(bound.m)) throw InvalidArgument("y_envelope: need m witnesses");
  double e_s = 0.0;
  BoundParams params = bound;
  params.hams.clear();
  for (const auto& w : witnesses) {
    if (!std::isfinite(w.energy)) throw InvalidArgument("y_envelope: witness energy is infinite");
    e_s += w.energy;
    params.hams.push_back(w.hamiltonian);
  }
  params.E = 2.0 * e_s / bound.m;
  std::vector<EnvelopeRow> rows;
  for (int r : r_grid) {
    if (r < 1) throw InvalidArgument("y_envelope: r must be positive");
    double tails = 0.0;
    for (const auto& s : marginal_spectra) tails += s.tail_moment(r, 0.0);
    EnvelopeRow row;
    row.r = r;
    row.eps = std::sqrt(std::max(0.0, tails));
    if (row.eps * row.eps <= 0.5 + 1e-12) row.y = fcb_bound(params, row.eps);
    rows.push_back(row);
  }
  return rows;
}

LocalChannel LocalChannel::parse(const std::string& lit) {
  LocalChannel ch;
  const auto pos = lit.find(':');
  const std::string kind = lit.substr(0, pos);
  if (kind == "identity") return ch;
  if (pos == std::string::npos) throw InvalidArgument("channel '" + lit + "': missing parameter");
  try {
    ch.p = std::stod(lit.substr(pos + 1));
  } catch (const std::exception&) {
    throw InvalidArgument("channel '" + lit + "': bad parameter");
  }
  if (!(ch.p >= 0.0 && ch.p <= 1.0)) throw InvalidArgument("channel '" + lit + "': p must lie in [0,1]");
  if (kind == "depolarizing") ch.kind = Kind::kDepolarizing;
  else if (kind == "dephasing") ch.kind = Kind::kDephasing;
  else throw InvalidArgument("channel '" + lit + "': unknown kind");
  return ch;
}

std::string LocalChannel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kIdentity: return "identity";
    case Kind::kDepolarizing: os << "depolarizing:" << p; break;
    case Kind::kDephasing: os << "dephasing:" << p; break;
  }
  return os.str();
}

DensityOp apply_local_channel(const DensityOp& rho, int party, const LocalChannel& ch) {
  if (ch.kind == LocalChannel::Kind::kIdentity || ch.p == 0.0) return rho;
  const DimSig& sig = rho.sig();
  const PartyLayout l = layout_of(sig, party);
  const Matrix& m = rho.mat();
  Matrix out;
  if (ch.kind == LocalChannel::Kind::kDephasing) {
    out = m;
    for (int i = 0; i < sig.total(); ++i) {
      for (int j = 0; j < sig.total(); ++j) {
        if (digit(i, l) != digit(j, l)) out(i, j) *= 1.0 - ch.p;
      }
    }
  } else {
    const Matrix mixed = Matrix::Identity(l.dim, l.dim) / static_cast<double>(l.dim);
    out = (1.0 - ch.p) * m + ch.p * replace_party(m, sig, party, mixed);
  }
  return DensityOp::sanitized(sig, out);
}

DensityOp apply_product_channel(const DensityOp& rho, const std::vector<LocalChannel>& channels) {
  const std::size_t n = rho.sig().parties();
  if (channels.size() != 1 && channels.size() != n) throw InvalidArgument("product channel: need 1 or n channels");
  DensityOp out = rho;
  for (std::size_t s = 0; s < n; ++s) {
    out = apply_local_channel(out, static_cast<int>(s), channels.size() == 1 ? channels[0] : channels[s]);
  }
  return out;
}

std::vector<LocalChannel> channel_registry() {
  return {LocalChannel{}, LocalChannel{LocalChannel::Kind::kDepolarizing, 0.3},
          LocalChannel{LocalChannel::Kind::kDephasing, 0.5}};
}

ApproxReport theorem1_experiment(const DensityOp& rho, const StateFunction& f, const std::vector<int>& subset,
                                 const std::vector<int>& r_grid, const std::optional<EnvelopeInputs>& envelope) {
  ApproxReport report;
  const double f_exact = f(rho);
  std::optional<BoundParams> params;
  if (envelope) {
    if (envelope->witnesses.size() != static_cast<std::size_t>(envelope->m)) {
      throw InvalidArgument("theorem1_experiment: need m witnesses");
    }
    double e_s = 0.0;
    for (int s = 0; s < envelope->m; ++s) {
      const Matrix g = witness_operator(rho, s, envelope->witnesses[static_cast<std::size_t>(s)]);
      e_s += (g * marginal(rho, s).mat()).trace().real();
    }
    params = BoundParams{envelope->C, envelope->D, envelope->m, 2.0 * e_s / envelope->m, envelope->witnesses, 0};
  }
  for (int r : r_grid) {
    const Truncation t = lambda_map(rho, subset, r);
    ApproxRow row;
    row.r = r;
    row.c_r = t.plan.c_r;
    double tails = 0.0;
    for (double d : t.plan.discarded) tails += d;
    row.eps_r = std::sqrt(tails);
    row.gentle_bound = 2.0 * row.eps_r;
    row.f_exact = f_exact;
    row.f_trunc = f(t.state);
    row.diff = std::abs(row.f_trunc - f_exact);
    if (params && row.eps_r <= 1.0 && row.c_r >= 0.5) {
      row.y = row.eps_r == 0.0 ? 0.0 : fcb_bound(*params, row.eps_r);
      row.holds = row.diff <= *row.y + 1e-8;
      if (!row.holds) ++report.violations;
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace qsep
