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

#include "qsep/relent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "qsep/entropy.hpp"
#include "qsep/error.hpp"

namespace qsep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kDriftBudget = 24;
constexpr int kLargeDim = 64;       // past this every evaluation is expensive
constexpr std::size_t kLargeCandidates = 2;

// drift steps cost a dim^3 evaluation each, shrink the budget past kLargeDim
std::size_t drift_budget(int dim) {
  if (dim <= kLargeDim) return kDriftBudget;
  const double scale = 4096.0 / (static_cast<double>(dim) * dim);
  return std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(kDriftBudget) * scale));
}
constexpr double kEigFloor = 1e-14;
constexpr double kPruneWeight = 1e-10;
constexpr int kMaxTotalDim = 4096;

// ---------------------------------------------------------------------------
// frame: parties reordered so that partition groups are contiguous

struct Frame {
  DimSig orig;
  DimSig sig;
  std::vector<int> perm;     // frame party k is original party perm[k]
  std::vector<int> inverse;  // original party p sits at frame position inverse[p]
  std::vector<int> group_dims;
};

Frame make_frame(const DimSig& sig, const Partition& pi) {
  if (static_cast<std::size_t>(pi.parties()) != sig.parties()) {
    throw InvalidArgument("partition does not match the number of parties");
  }
  Frame f;
  f.orig = sig;
  for (const auto& g : pi.groups()) {
    int d = 1;
    for (int p : g) {
      f.perm.push_back(p);
      d *= sig.dim(static_cast<std::size_t>(p));
    }
    f.group_dims.push_back(d);
  }
  f.inverse.assign(f.perm.size(), 0);
  std::vector<int> dims;
  for (std::size_t k = 0; k < f.perm.size(); ++k) {
    f.inverse[static_cast<std::size_t>(f.perm[k])] = static_cast<int>(k);
    dims.push_back(sig.dim(static_cast<std::size_t>(f.perm[k])));
  }
  f.sig = DimSig(dims);
  return f;
}

Matrix to_frame(const Matrix& m, const Frame& f) { return permute_parties(m, f.orig, f.perm); }
Matrix from_frame(const Matrix& m, const Frame& f) { return permute_parties(m, f.sig, f.inverse); }

// ---------------------------------------------------------------------------
// linear minimization oracle

Vector random_factor(int dim, std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(n(gen), n(gen));
  return v / v.norm();
}

Vector min_eigvec(const Matrix& h, double& value) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  value = es.eigenvalues()(0);
  return es.eigenvectors().col(0);
}

LmoResult lmo_frame(const Matrix& g, const std::vector<int>& gdims, int restarts, int max_sweeps,
                    std::uint64_t seed, const std::vector<Vector>* warm) {
  const int total = static_cast<int>(g.rows());
  const std::size_t groups = gdims.size();
  LmoResult best;
  if (groups == 1) {
    best.atom.factors = {min_eigvec(g, best.value)};
    return best;
  }
  double worst = -kInf;
  best.value = kInf;
  restarts = std::max(restarts, 1);
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 gen(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(r) + 1);
    std::vector<Vector> f(groups);
    for (std::size_t k = 0; k < groups; ++k) {
      f[k] = (r == 0 && warm) ? (*warm)[k] : random_factor(gdims[k], gen);
    }
    double value = kInf;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      const double before = value;
      for (std::size_t k = 0; k < groups; ++k) {
        int left = 1;
        int right = 1;
        for (std::size_t j = 0; j < k; ++j) left *= gdims[j];
        for (std::size_t j = k + 1; j < groups; ++j) right *= gdims[j];
        const Vector lv = kron_all(std::span<const Vector>(f.data(), k));
        const Vector rv = kron_all(std::span<const Vector>(f.data() + k + 1, groups - k - 1));
        const int dk = gdims[k];
        // g contracted with lv (x) . (x) rv on both sides
        Matrix gm = Matrix::Zero(total, dk);
        for (int l = 0; l < left; ++l) {
          for (int a = 0; a < dk; ++a) gm.col(a) += lv(l) * (g.middleCols((l * dk + a) * right, right) * rv);
        }
        Matrix h = Matrix::Zero(dk, dk);
        for (int l = 0; l < left; ++l) {
          for (int a = 0; a < dk; ++a) {
            h.row(a) += std::conj(lv(l)) * (rv.adjoint() * gm.middleRows((l * dk + a) * right, right));
          }
        }
        f[k] = min_eigvec(h, value);
      }
      if (sweep > 0 && before - value <= 1e-14 * (1.0 + std::abs(value))) break;
    }
    worst = std::max(worst, value);
    if (value < best.value) {
      best.value = value;
      best.atom.factors = f;
    }
  }
  best.spread = worst - best.value;
  return best;
}

// ---------------------------------------------------------------------------
// objective D(rho || sigma) = -S(rho) - Tr rho ln sigma and its gradient

struct SigmaEval {
  Matrix u;
  Matrix k;  // (U^dagger rho U) o Phi
  double value = kInf;
};

SigmaEval evaluate(const Matrix& rho, double s_rho, const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.adjoint()));
  SigmaEval ev;
  ev.u = es.eigenvectors();
  const RealVector& mu = es.eigenvalues();
  const int n = static_cast<int>(mu.size());
  const Matrix rt = ev.u.adjoint() * rho * ev.u;
  RealVector m(n);
  RealVector lm(n);
  double cross = 0.0;
  bool finite = true;
  for (int i = 0; i < n; ++i) {
    m(i) = std::max(mu(i), kEigFloor);
    lm(i) = std::log(m(i));
    const double w = rt(i, i).real();
    if (mu(i) < kEigFloor && w > 1e-12) finite = false;
    cross += w * lm(i);
  }
  ev.k.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = m(i);
      const double b = m(j);
      const double phi = std::abs(a - b) > 1e-9 * std::max(a, b) ? (lm(i) - lm(j)) / (a - b) : 2.0 / (a + b);
      ev.k(i, j) = rt(i, j) * phi;
    }
  }
  ev.value = finite ? -s_rho - cross : kInf;
  return ev;
}

Matrix gradient(const SigmaEval& ev) { return -(ev.u * ev.k * ev.u.adjoint()); }

// <psi|G|psi> without forming G
double directional(const SigmaEval& ev, const Vector& psi) {
  const Vector t = ev.u.adjoint() * psi;
  return -(t.adjoint() * ev.k * t)(0, 0).real();
}

// ---------------------------------------------------------------------------
// Frank-Wolfe state

struct Active {
  std::vector<Vector> factors;
  Vector psi;
  double w = 0.0;
  double energy = 0.0;
};

struct Problem {
  Matrix rho;
  double s_rho = 0.0;
  Frame frame;
  const Matrix* h = nullptr;  // frame Hamiltonian for the constrained variant
  double e_max = kInf;
};

Matrix mixture(const std::vector<Active>& atoms, int dim) {
  Matrix s = Matrix::Zero(dim, dim);
  for (const auto& a : atoms) s.noalias() += a.w * (a.psi * a.psi.adjoint());
  return s;
}

double mixture_energy(const std::vector<Active>& atoms) {
  double e = 0.0;
  for (const auto& a : atoms) e += a.w * a.energy;
  return e;
}

std::size_t add_atom(std::vector<Active>& atoms, std::vector<Vector> factors, const Problem& pb) {
  Vector psi = kron_all(std::span<const Vector>(factors));
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (std::norm(atoms[i].psi.dot(psi)) > 1.0 - 1e-12) return i;
  }
  Active a;
  a.energy = pb.h ? (psi.adjoint() * (*pb.h) * psi)(0, 0).real() : 0.0;
  a.factors = std::move(factors);
  a.psi = std::move(psi);
  atoms.push_back(std::move(a));
  return atoms.size() - 1;
}

// exact line search on sigma + t (|a><a| - |b><b|), t in [0, t_max]
double line_search(const Problem& pb, const Matrix& sigma, const Vector& a, const Vector& b, double d0,
                   double t_max) {
  if (!(d0 < 0.0) || !(t_max > 0.0)) return 0.0;
  const Matrix dir = a * a.adjoint() - b * b.adjoint();
  auto deriv = [&](double t) {
    const SigmaEval ev = evaluate(pb.rho, pb.s_rho, sigma + t * dir);
    const double v = directional(ev, a) - directional(ev, b);
    return std::isfinite(v) ? v : kInf;
  };
  double hi_d = deriv(t_max);
  if (hi_d <= 0.0) return t_max;
  double lo = 0.0;
  double hi = t_max;
  double lo_d = d0;
  int side = 0;
  const int max_evals = sigma.rows() > kLargeDim ? 12 : 80;
  for (int it = 0; it < max_evals && hi - lo > 1e-13 * t_max; ++it) {
    double t;
    if (std::isfinite(hi_d)) {
      t = hi - hi_d * (hi - lo) / (hi_d - lo_d);
      if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
    } else {
      t = 0.5 * (lo + hi);
    }
    const double d = deriv(t);
    if (std::abs(d) < 1e-15 || std::abs(d) <= 1e-8 * std::abs(d0)) return t;
    if (d < 0.0) {
      lo = t;
      lo_d = d;
      if (side == -1 && std::isfinite(hi_d)) hi_d *= 0.5;
      side = -1;
    } else {
      hi = t;
      hi_d = d;
      if (side == 1) lo_d *= 0.5;
      side = 1;
    }
  }
  return lo;
}

// moves weight t from atom `from` to atom `to` when it lowers the objective
bool pairwise_step(const Problem& pb, std::vector<Active>& atoms, Matrix& sigma, double& value, const SigmaEval& ev,
                   std::size_t to, std::size_t from) {
  if (to == from) return false;
  double t_max = atoms[from].w;
  if (pb.h) {
    const double de = atoms[to].energy - atoms[from].energy;
    if (de > 0.0) t_max = std::min(t_max, std::max(0.0, (pb.e_max - mixture_energy(atoms)) / de));
  }
  const double d0 = directional(ev, atoms[to].psi) - directional(ev, atoms[from].psi);
  const double t = line_search(pb, sigma, atoms[to].psi, atoms[from].psi, d0, t_max);
  if (!(t > 0.0)) return false;
  const Matrix next = sigma + t * (atoms[to].psi * atoms[to].psi.adjoint() - atoms[from].psi * atoms[from].psi.adjoint());
  const double v = evaluate(pb.rho, pb.s_rho, next).value;
  if (!(v <= value)) return false;
  sigma = next;
  value = v;
  atoms[to].w += t;
  atoms[from].w = t == atoms[from].w ? 0.0 : atoms[from].w - t;
  return true;
}

// swaps the whole weight of `atom` onto a new product vector when that helps
bool try_replace(const Problem& pb, Active& atom, const std::vector<Vector>& factors, Matrix& sigma, double& value) {
  Vector psi = kron_all(std::span<const Vector>(factors));
  const double e = pb.h ? (psi.adjoint() * (*pb.h) * psi)(0, 0).real() : 0.0;
  if (pb.h && e > atom.energy) return false;
  const Matrix next = sigma + atom.w * (psi * psi.adjoint() - atom.psi * atom.psi.adjoint());
  const double v = evaluate(pb.rho, pb.s_rho, next).value;
  if (!(v < value)) return false;
  sigma = next;
  value = v;
  atom.factors = factors;
  atom.psi = std::move(psi);
  atom.energy = e;
  return true;
}

// Caratheodory reduction: at most dim^2 + 1 atoms are needed for a fixed mixture
bool reduce_atoms(std::vector<Active>& atoms, int dim) {
  const std::size_t need = static_cast<std::size_t>(dim) * dim + 1;
  if (dim > 16 || atoms.size() <= 2 * need) return false;
  const auto n = static_cast<Eigen::Index>(atoms.size());
  Eigen::MatrixXd a(static_cast<Eigen::Index>(need), n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Vector& v = atoms[static_cast<std::size_t>(c)].psi;
    Eigen::Index row = 0;
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        const Complex z = v(i) * std::conj(v(j));
        a(row++, c) = z.real();
        if (j > i) a(row++, c) = z.imag();
      }
    }
    a(row, c) = 1.0;
  }
  Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(a).kernel();
  if (kernel.cols() == 1 && kernel.norm() == 0.0) return false;
  RealVector w(n);
  for (Eigen::Index c = 0; c < n; ++c) w(c) = atoms[static_cast<std::size_t>(c)].w;
  for (Eigen::Index k = 0; k < kernel.cols(); ++k) {
    RealVector z = kernel.col(k);
    if (z.maxCoeff() < -z.minCoeff()) z = -z;
    double alpha = kInf;
    Eigen::Index drop = -1;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (w(c) > 0.0 && z(c) > 1e-12 * z.cwiseAbs().maxCoeff() && w(c) / z(c) < alpha) {
        alpha = w(c) / z(c);
        drop = c;
      }
    }
    if (drop < 0) continue;
    w -= alpha * z;
    w(drop) = 0.0;
    // keep the remaining directions from touching the dropped atom
    for (Eigen::Index j = k + 1; j < kernel.cols(); ++j) kernel.col(j) -= (kernel(drop, j) / z(drop)) * z;
  }
  for (Eigen::Index c = 0; c < n; ++c) atoms[static_cast<std::size_t>(c)].w = std::max(0.0, w(c));
  atoms.erase(std::remove_if(atoms.begin(), atoms.end(), [](const Active& x) { return !(x.w > 1e-15); }),
              atoms.end());
  double total = 0.0;
  for (const auto& x : atoms) total += x.w;
  for (auto& x : atoms) x.w /= total;
  return true;
}

std::vector<double> mu_grid() {
  std::vector<double> g{0.0};
  for (int i = 0; i < 25; ++i) g.push_back(std::pow(10.0, -3.0 + 6.0 * i / 24.0));
  return g;
}

struct Certificate {
  double lower = 0.0;  // lower bound on min <G, sigma'> over feasible atoms mixtures
  std::vector<LmoResult> candidates;
  double spread = 0.0;
};

Certificate certify(const Problem& pb, const Matrix& g, const SolverOptions& opts, std::uint64_t seed,
                    const std::vector<Vector>* warm) {
  Certificate c;
  const auto& gd = pb.frame.group_dims;
  if (!pb.h) {
    c.candidates.push_back(lmo_frame(g, gd, opts.restarts, opts.max_sweeps, seed, warm));
    c.lower = c.candidates.back().value;
    c.spread = c.candidates.back().spread;
    return c;
  }
  c.lower = -kInf;
  std::uint64_t k = 0;
  for (double mu : mu_grid()) {
    LmoResult r = lmo_frame(g + mu * (*pb.h), gd, opts.restarts, opts.max_sweeps, seed + 1000003 * k++, warm);
    c.lower = std::max(c.lower, r.value - mu * pb.e_max);
    c.spread = std::max(c.spread, r.spread);
    c.candidates.push_back(std::move(r));
  }
  return c;
}

void drop_empty(std::vector<Active>& atoms) {
  atoms.erase(std::remove_if(atoms.begin(), atoms.end(), [](const Active& a) { return !(a.w > 0.0); }), atoms.end());
}

SolverOptions certificate_options(const SolverOptions& opts) {
  SolverOptions o = opts;
  o.restarts = std::max(4 * opts.restarts, 32);
  return o;
}

// lower bound value - gap at sigma from a full-restart oracle call
double certified_bound(const Problem& pb, const Matrix& sigma, const SolverOptions& opts, double& spread) {
  const SigmaEval ev = evaluate(pb.rho, pb.s_rho, sigma);
  if (!std::isfinite(ev.value)) return -kInf;
  const Matrix g = gradient(ev);
  const Certificate c = certify(pb, g, certificate_options(opts), opts.seed ^ 0xC0FFEEULL, nullptr);
  spread = c.spread;
  return ev.value - ((g * sigma).trace().real() - c.lower);
}

ERSolution finish(const DensityOp& rho, const Partition& pi, const Problem& pb, std::vector<Active> atoms,
                  const SolverOptions& opts, ERSolution sol, const Matrix* best_iterate = nullptr) {
  atoms.erase(std::remove_if(atoms.begin(), atoms.end(), [](const Active& a) { return a.w < kPruneWeight; }),
              atoms.end());
  double total = 0.0;
  for (const auto& a : atoms) total += a.w;
  for (auto& a : atoms) a.w /= total;
  const int dim = rho.dim();
  const Matrix sigma_f = mixture(atoms, dim);
  const SigmaEval ev = evaluate(pb.rho, pb.s_rho, sigma_f);
  if (std::isfinite(ev.value)) {
    const Matrix g = gradient(ev);
    double inner = 0.0;
    for (const auto& a : atoms) inner += a.w * directional(ev, a.psi);
    const Certificate c = certify(pb, g, certificate_options(opts), opts.seed ^ 0xC0FFEEULL, nullptr);
    double lower = c.lower;
    if (!pb.h) {
      for (const auto& a : atoms) lower = std::min(lower, directional(ev, a.psi));
    }
    sol.gap = inner - lower;
    sol.restart_spread = c.spread;
  } else {
    sol.gap = kInf;
  }
  sol.sigma = DensityOp::sanitized(rho.sig(), from_frame(sigma_f, pb.frame));
  sol.value = relative_entropy(rho, sol.sigma).value();
  // f* >= f(sigma_t) - gap_t at every iterate, keep the best of the two bounds
  if (best_iterate && std::isfinite(sol.value)) {
    double spread = 0.0;
    const double bound = certified_bound(pb, *best_iterate, opts, spread);
    if (bound > sol.value - sol.gap) {
      sol.gap = std::max(0.0, sol.value - bound);
      sol.restart_spread = std::max(sol.restart_spread, spread);
    }
  }
  for (const auto& a : atoms) sol.atoms.push_back({a.w, SepAtom{a.factors}});
  (void)pi;
  return sol;
}

std::vector<Vector> basis_factors(int index, const std::vector<int>& gdims) {
  std::vector<Vector> f(gdims.size());
  for (int k = static_cast<int>(gdims.size()) - 1; k >= 0; --k) {
    const int d = gdims[static_cast<std::size_t>(k)];
    f[static_cast<std::size_t>(k)] = Vector::Unit(d, index % d);
    index /= d;
  }
  return f;
}

ERSolution run_fw(const DensityOp& rho, const Partition& pi, const SolverOptions& opts, Problem pb,
                  std::vector<Active> atoms) {
  const int dim = rho.dim();
  Matrix sigma = mixture(atoms, dim);
  double value = evaluate(pb.rho, pb.s_rho, sigma).value;
  ERSolution sol;
  if (!std::isfinite(value)) {
    sol.iterations = 0;
    return finish(rho, pi, pb, std::move(atoms), opts, std::move(sol));
  }
  std::vector<Vector> last_fw;
  std::size_t drift_cursor = 0;
  double best_bound = -kInf;
  Matrix best_sigma;
  for (int it = 0; it < opts.max_iters; ++it) {
    const SigmaEval ev = evaluate(pb.rho, pb.s_rho, sigma);
    const Matrix g = gradient(ev);
    std::vector<double> vals(atoms.size());
    double inner = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      vals[i] = directional(ev, atoms[i].psi);
      inner += atoms[i].w * vals[i];
    }
    const std::uint64_t seed = opts.seed + 0x51ED27ULL * static_cast<std::uint64_t>(it + 1);
    SolverOptions cheap = opts;
    cheap.restarts = std::min(opts.restarts, 2);
    const Certificate cert = certify(pb, g, cheap, seed, last_fw.empty() ? nullptr : &last_fw);
    double lower = cert.lower;
    if (!pb.h) lower = std::min(lower, *std::min_element(vals.begin(), vals.end()));
    sol.gap = inner - lower;
    sol.restart_spread = cert.spread;
    sol.iterations = it + 1;
    if (value - sol.gap > best_bound) {
      best_bound = value - sol.gap;
      best_sigma = sigma;
    }
    if (sol.gap <= opts.tol) {
      sol.converged = true;
      sol.history.push_back(value);
      break;
    }

    std::size_t away = 0;
    for (std::size_t i = 1; i < atoms.size(); ++i) {
      if (vals[i] > vals[away]) away = i;
    }
    // try every candidate vertex, keep the one with the lowest objective
    double best_value = value;
    std::vector<Active> best_atoms;
    Matrix best_sigma;
    std::vector<std::size_t> order(cert.candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (dim > kLargeDim && order.size() > kLargeCandidates) {
      std::vector<double> slope(order.size());
      for (std::size_t c = 0; c < order.size(); ++c) {
        slope[c] = directional(ev, kron_all(std::span<const Vector>(cert.candidates[c].atom.factors)));
      }
      std::partial_sort(order.begin(), order.begin() + kLargeCandidates, order.end(),
                        [&](std::size_t x, std::size_t y) { return slope[x] < slope[y]; });
      order.resize(kLargeCandidates);
    }
    for (std::size_t c : order) {
      const auto& cand = cert.candidates[c];
      std::vector<Active> trial = atoms;
      Matrix s = sigma;
      double v = value;
      const std::size_t to = add_atom(trial, cand.atom.factors, pb);
      if (pairwise_step(pb, trial, s, v, ev, to, away) && v < best_value) {
        best_value = v;
        best_atoms = std::move(trial);
        best_sigma = std::move(s);
        last_fw = cand.atom.factors;
      }
    }
    bool moved = false;
    if (!best_atoms.empty()) {
      atoms = std::move(best_atoms);
      sigma = std::move(best_sigma);
      value = best_value;
      moved = true;
    }
    // let each atom drift towards a locally better product vector
    if (pb.frame.group_dims.size() > 1) {
      const std::size_t count = atoms.size();
      const std::size_t budget = std::min(count, drift_budget(dim));
      for (std::size_t step = 0; step < budget; ++step) {
        const std::size_t i = (drift_cursor + step) % count;
        if (!(atoms[i].w > 0.0)) continue;
        const SigmaEval aev = evaluate(pb.rho, pb.s_rho, sigma);
        const Matrix ag = gradient(aev);
        const LmoResult local = lmo_frame(ag, pb.frame.group_dims, 1, 2, seed, &atoms[i].factors);
        if (!(local.value < directional(aev, atoms[i].psi) - 1e-15)) continue;
        if (try_replace(pb, atoms[i], local.atom.factors, sigma, value)) {
          moved = true;
          continue;
        }
        const std::size_t to = add_atom(atoms, local.atom.factors, pb);
        if (pairwise_step(pb, atoms, sigma, value, aev, to, i)) moved = true;
      }
      drift_cursor = (drift_cursor + budget) % count;
    }
    // corrective pairwise steps inside the active set
    for (int inner_it = 0; inner_it < opts.inner_steps; ++inner_it) {
      drop_empty(atoms);
      const SigmaEval iev = evaluate(pb.rho, pb.s_rho, sigma);
      std::size_t lo = 0;
      std::size_t hi = 0;
      std::vector<double> iv(atoms.size());
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        iv[i] = directional(iev, atoms[i].psi);
        if (iv[i] < iv[lo]) lo = i;
        if (iv[i] > iv[hi]) hi = i;
      }
      if (iv[hi] - iv[lo] <= 0.1 * opts.tol) break;
      if (!pairwise_step(pb, atoms, sigma, value, iev, lo, hi)) break;
      moved = true;
    }
    drop_empty(atoms);
    if (reduce_atoms(atoms, dim) || it % 50 == 49) sigma = mixture(atoms, dim);
    sol.history.push_back(value);
    if (!moved) break;
  }
  return finish(rho, pi, pb, std::move(atoms), opts, std::move(sol), best_sigma.size() ? &best_sigma : nullptr);
}

Problem make_problem(const DensityOp& rho, const Partition& pi) {
  Problem pb;
  pb.frame = make_frame(rho.sig(), pi);
  pb.rho = to_frame(rho.mat(), pb.frame);
  pb.s_rho = von_neumann_entropy(rho);
  return pb;
}

std::vector<Active> atoms_from(const std::vector<WeightedAtom>& warm, const Problem& pb) {
  std::vector<Active> atoms;
  double total = 0.0;
  for (const auto& wa : warm) total += wa.weight;
  for (const auto& wa : warm) {
    if (!(wa.weight > 0.0)) continue;
    const std::size_t i = add_atom(atoms, wa.atom.factors, pb);
    atoms[i].w += wa.weight / total;
  }
  return atoms;
}

std::vector<Active> default_start(const Problem& pb, const SolverOptions& opts) {
  std::vector<Active> atoms;
  const int dim = pb.frame.sig.total();
  for (int i = 0; i < dim; ++i) {
    const std::size_t k = add_atom(atoms, basis_factors(i, pb.frame.group_dims), pb);
    atoms[k].w += 0.5 / dim;
  }
  const LmoResult best = lmo_frame(-pb.rho, pb.frame.group_dims, opts.restarts, opts.max_sweeps, opts.seed, nullptr);
  const std::size_t k = add_atom(atoms, best.atom.factors, pb);
  atoms[k].w += 0.5;
  return atoms;
}

}  // namespace

// ---------------------------------------------------------------------------

Partition::Partition(std::vector<std::vector<int>> groups) : groups_(std::move(groups)) {
  if (groups_.empty()) throw InvalidArgument("partition: no groups");
  std::vector<int> all;
  for (auto& g : groups_) {
    if (g.empty()) throw InvalidArgument("partition: empty group");
    std::sort(g.begin(), g.end());
    all.insert(all.end(), g.begin(), g.end());
  }
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i] != static_cast<int>(i)) throw InvalidArgument("partition: groups must be disjoint and cover 0..n-1");
  }
  parties_ = static_cast<int>(all.size());
}

Partition Partition::finest(int parties) {
  std::vector<std::vector<int>> g;
  for (int i = 0; i < parties; ++i) g.push_back({i});
  return Partition(std::move(g));
}

Partition Partition::single(int parties) {
  std::vector<int> g(static_cast<std::size_t>(parties));
  std::iota(g.begin(), g.end(), 0);
  return Partition({g});
}

bool Partition::refines(const Partition& coarser) const {
  if (coarser.parties_ != parties_) return false;
  for (const auto& g : groups_) {
    const bool inside = std::any_of(coarser.groups_.begin(), coarser.groups_.end(), [&](const std::vector<int>& c) {
      return std::includes(c.begin(), c.end(), g.begin(), g.end());
    });
    if (!inside) return false;
  }
  return true;
}

std::string Partition::describe() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < groups_.size(); ++k) {
    if (k) os << "|";
    for (std::size_t i = 0; i < groups_[k].size(); ++i) os << (i ? "," : "") << groups_[k][i];
  }
  return os.str();
}

Vector SepAtom::vector(const DimSig& sig, const Partition& pi) const {
  const Frame f = make_frame(sig, pi);
  if (factors.size() != pi.size()) throw InvalidArgument("atom does not match the partition");
  return permute_parties(kron_all(std::span<const Vector>(factors)), f.sig, f.inverse);
}

LmoResult product_lmo(const Matrix& g, const DimSig& sig, const Partition& pi, int restarts, int max_sweeps,
                      std::uint64_t seed) {
  if (g.rows() != sig.total() || g.cols() != sig.total()) throw InvalidArgument("product_lmo: size mismatch");
  const Frame f = make_frame(sig, pi);
  return lmo_frame(to_frame(g, f), f.group_dims, restarts, max_sweeps, seed, nullptr);
}

ERSolution relent_entanglement(const DensityOp& rho, const Partition& pi, const SolverOptions& opts,
                               const std::vector<WeightedAtom>* warm) {
  Problem pb = make_problem(rho, pi);
  std::vector<Active> atoms;
  if (warm && !warm->empty()) {
    atoms = atoms_from(*warm, pb);
    if (!std::isfinite(evaluate(pb.rho, pb.s_rho, mixture(atoms, rho.dim())).value)) atoms.clear();
  }
  if (atoms.empty()) atoms = default_start(pb, opts);
  return run_fw(rho, pi, opts, std::move(pb), std::move(atoms));
}

DensityOp tensor_power_regrouped(const DensityOp& rho, int k) {
  if (k < 1) throw InvalidArgument("tensor power: k must be positive");
  if (k == 1) return rho;
  const auto& dims = rho.sig().dims();
  const int n = static_cast<int>(dims.size());
  double total = 1.0;
  for (int c = 0; c < k; ++c) total *= rho.dim();
  if (total > kMaxTotalDim) {
    int admissible = 1;
    double t = rho.dim();
    while (t * rho.dim() <= kMaxTotalDim) {
      t *= rho.dim();
      ++admissible;
    }
    throw InvalidArgument("dimension overflow: admissible k_max = " + std::to_string(admissible));
  }
  Matrix m = rho.mat();
  std::vector<int> copy_dims = dims;
  for (int c = 1; c < k; ++c) {
    m = kron(m, rho.mat());
    copy_dims.insert(copy_dims.end(), dims.begin(), dims.end());
  }
  // party-major: new slot p*k + c holds old slot c*n + p
  std::vector<int> perm(static_cast<std::size_t>(n * k));
  for (int p = 0; p < n; ++p) {
    for (int c = 0; c < k; ++c) perm[static_cast<std::size_t>(p * k + c)] = c * n + p;
  }
  std::vector<int> merged(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    merged[static_cast<std::size_t>(p)] = 1;
    for (int c = 0; c < k; ++c) merged[static_cast<std::size_t>(p)] *= dims[static_cast<std::size_t>(p)];
  }
  return DensityOp::sanitized(DimSig(merged), permute_parties(m, DimSig(copy_dims), perm));
}

namespace {

// atom of sigma_a (x) sigma_b regrouped party-major, per group
SepAtom combine_atoms(const SepAtom& a, const SepAtom& b, const Partition& pi, const std::vector<int>& dims_a,
                      const std::vector<int>& dims_b) {
  SepAtom out;
  for (std::size_t g = 0; g < pi.size(); ++g) {
    const auto& grp = pi.groups()[g];
    const int sz = static_cast<int>(grp.size());
    std::vector<int> d;
    for (int p : grp) d.push_back(dims_a[static_cast<std::size_t>(p)]);
    for (int p : grp) d.push_back(dims_b[static_cast<std::size_t>(p)]);
    std::vector<int> perm(static_cast<std::size_t>(2 * sz));
    for (int i = 0; i < sz; ++i) {
      perm[static_cast<std::size_t>(2 * i)] = i;
      perm[static_cast<std::size_t>(2 * i + 1)] = sz + i;
    }
    out.factors.push_back(permute_parties(Vector(kron(a.factors[g], b.factors[g])), DimSig(d), perm));
  }
  return out;
}

}  // namespace

std::vector<RegularizedPoint> regularized_estimate(const DensityOp& rho, const Partition& pi, int k_max,
                                                   const SolverOptions& opts) {
  if (k_max < 1) throw InvalidArgument("regularized_estimate: k_max must be positive");
  (void)tensor_power_regrouped(rho, k_max);  // dimension check up front
  std::vector<RegularizedPoint> out;
  const ERSolution first = relent_entanglement(rho, pi, opts);
  out.push_back({1, first.value, first.gap, first.iterations});
  std::vector<WeightedAtom> prev = first.atoms;
  std::vector<int> prev_dims = rho.sig().dims();
  for (int k = 2; k <= k_max; ++k) {
    const DensityOp power = tensor_power_regrouped(rho, k);
    std::vector<WeightedAtom> warm;
    for (const auto& a : prev) {
      for (const auto& b : first.atoms) {
        warm.push_back({a.weight * b.weight, combine_atoms(a.atom, b.atom, pi, prev_dims, rho.sig().dims())});
      }
    }
    ERSolution sol = relent_entanglement(power, pi, opts, &warm);
    // the warm start is itself separable with a known value; never report worse
    const double warm_value = out.back().per_copy * (k - 1) + first.value;
    if (sol.value > warm_value) {
      sol.gap = std::max(0.0, sol.gap - (sol.value - warm_value));
      sol.value = warm_value;
      sol.atoms = std::move(warm);
    }
    out.push_back({k, sol.value / k, sol.gap / k, sol.iterations});
    prev = sol.atoms;
    prev_dims = power.sig().dims();
  }
  return out;
}

Matrix total_hamiltonian(const DimSig& sig, const std::vector<HamiltonianSpec>& hams) {
  if (hams.size() != sig.parties()) throw InvalidArgument("energy constraint: need one Hamiltonian per party");
  Matrix h = Matrix::Zero(sig.total(), sig.total());
  for (std::size_t s = 0; s < hams.size(); ++s) {
    const int d = sig.dim(s);
    RealVector levels(d);
    for (int i = 0; i < d; ++i) levels(i) = hams[s].level(i + 1);
    h += embed_local(levels.cast<Complex>().asDiagonal().toDenseMatrix(), sig, static_cast<int>(s));
  }
  return h;
}

ERSolution energy_constrained_er(const DensityOp& rho, const Partition& pi, const EnergyConstraint& constraint,
                                 const SolverOptions& opts, const std::vector<WeightedAtom>* warm) {
  double ground = 0.0;
  for (const auto& h : constraint.hams) ground += h.ground();
  if (constraint.E < ground - 1e-12 * std::max(1.0, std::abs(ground))) throw InvalidArgument("infeasible energy");
  const Matrix h_orig = total_hamiltonian(rho.sig(), constraint.hams);

  ERSolution free = relent_entanglement(rho, pi, opts);
  const double free_energy = (h_orig * free.sigma.mat()).trace().real();
  if (free_energy <= constraint.E) return free;

  Problem pb = make_problem(rho, pi);
  const Matrix h_frame = to_frame(h_orig, pb.frame);
  pb.h = &h_frame;
  pb.e_max = constraint.E;

  std::vector<Active> atoms;
  if (warm && !warm->empty()) {
    atoms = atoms_from(*warm, pb);
    if (mixture_energy(atoms) > constraint.E + 1e-12) atoms.clear();
  }
  if (atoms.empty()) {
    const int dim = rho.dim();
    const double mixed = h_frame.trace().real() / dim;
    const double w = mixed > ground ? std::min(0.5, (constraint.E - ground) / (mixed - ground)) : 0.5;
    const std::size_t g0 = add_atom(atoms, basis_factors(0, pb.frame.group_dims), pb);
    atoms[g0].w += 1.0 - w;
    if (w > 0.0) {
      for (int i = 0; i < dim; ++i) {
        const std::size_t k = add_atom(atoms, basis_factors(i, pb.frame.group_dims), pb);
        atoms[k].w += w / dim;
      }
    }
  }
  ERSolution sol = run_fw(rho, pi, opts, std::move(pb), std::move(atoms));
  if (free_energy <= constraint.E + 1e-12 && free.value < sol.value) return free;
  return sol;
}

std::vector<ERSolution> energy_sweep(const DensityOp& rho, const Partition& pi,
                                     const std::vector<HamiltonianSpec>& hams, const std::vector<double>& energies,
                                     const SolverOptions& opts) {
  std::vector<ERSolution> out;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (i > 0 && !(energies[i] > energies[i - 1])) throw InvalidArgument("energy_sweep: energies must increase");
    const std::vector<WeightedAtom>* warm = out.empty() ? nullptr : &out.back().atoms;
    ERSolution sol = energy_constrained_er(rho, pi, {hams, energies[i]}, opts, warm);
    // the previous optimum stays feasible at a larger energy
    if (!out.empty() && out.back().value < sol.value) sol = out.back();
    out.push_back(std::move(sol));
  }
  return out;
}

std::vector<std::vector<Matrix>> spectral_projector_sequence(const DensityOp& rho, const std::vector<int>& ranks) {
  std::vector<std::vector<Matrix>> out;
  std::vector<SpectralDecomp> decs;
  for (std::size_t s = 0; s < rho.sig().parties(); ++s) decs.push_back(eigh(marginal(rho, static_cast<int>(s)).mat()));
  for (int r : ranks) {
    std::vector<Matrix> step;
    for (const auto& d : decs) step.push_back(top_projector(d, std::min(r, static_cast<int>(d.values.size()))));
    out.push_back(std::move(step));
  }
  return out;
}

FdaReport fda_experiment(const DensityOp& rho, const std::vector<std::vector<Matrix>>& projectors,
                         const std::vector<int>& m_grid, const SolverOptions& opts) {
  const std::size_t n = rho.sig().parties();
  FdaReport report;
  for (int m : m_grid) {
    if (m < 1 || static_cast<std::size_t>(m) > n) throw InvalidArgument("fda_experiment: m out of range");
  }
  std::vector<std::vector<double>> values(m_grid.size());
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    if (projectors[k].size() != n) throw InvalidArgument("fda_experiment: need one projector per party");
    const Matrix q = kron_all(std::span<const Matrix>(projectors[k]));
    const Matrix compressed = q * rho.mat() * q;
    const double c = compressed.trace().real();
    for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
      FdaRow row;
      row.k = static_cast<int>(k + 1);
      row.m = m_grid[mi];
      row.c_k = c;
      if (!(c > 1e-12)) {
        row.skipped = true;
        row.note = "truncation annihilates state";
        report.rows.push_back(row);
        continue;
      }
      const DensityOp rk = DensityOp::sanitized(rho.sig(), compressed / c);
      std::vector<int> keep(static_cast<std::size_t>(row.m));
      std::iota(keep.begin(), keep.end(), 0);
      const DensityOp reduced = row.m == static_cast<int>(n) ? rk : partial_trace(rk, keep);
      if (row.m >= 2) {
        const ERSolution sol = relent_entanglement(reduced, Partition::finest(row.m), opts);
        row.value = sol.value;
        row.gap = sol.gap;
        row.qmi_scaled = c * mutual_information(rk);
        row.qmi = mutual_information(rho);
        if (row.qmi_scaled > row.qmi + 1e-8) ++report.violations;
      }
      values[mi].push_back(row.value);
      report.rows.push_back(row);
    }
  }
  for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
    const auto& v = values[mi];
    double change = 0.0;
    if (v.size() >= 2) change = std::abs(v.back() - v[v.size() - 2]) / std::max(std::abs(v.back()), 1e-12);
    report.last_change.emplace_back(m_grid[mi], change);
  }
  return report;
}

InequalityResult check_er_upper_bound(const DensityOp& rho, const Partition& pi, const SolverOptions& opts) {
  const ERSolution sol = relent_entanglement(rho, pi, opts);
  double sum = 0.0;
  double largest = 0.0;
  for (const auto& g : pi.groups()) {
    const double s = von_neumann_entropy(partial_trace(rho, g));
    sum += s;
    largest = std::max(largest, s);
  }
  InequalityResult r{"ER-UB", sol.value, sum - largest, std::max(sol.gap, 0.0), false};
  r.violated = r.small_side > r.large_side + r.allowance + kInequalitySlack;
  return r;
}

InequalityResult check_mixture_bound(const DensityOp& rho, const DensityOp& sigma, double p, const Partition& pi,
                                     const SolverOptions& opts) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("mixture bound: p must lie in [0,1]");
  const DensityOp mix = DensityOp::sanitized(rho.sig(), p * rho.mat() + (1.0 - p) * sigma.mat());
  const ERSolution a = relent_entanglement(rho, pi, opts);
  const ERSolution b = relent_entanglement(sigma, pi, opts);
  const ERSolution c = relent_entanglement(mix, pi, opts);
  InequalityResult r{"RE-LAA", p * a.value + (1.0 - p) * b.value, c.lower_certificate() + binary_entropy(p),
                     p * std::max(a.gap, 0.0) + (1.0 - p) * std::max(b.gap, 0.0), false};
  r.violated = r.small_side > r.large_side + r.allowance + kInequalitySlack;
  return r;
}

InequalityResult check_conditional_lower_bound(const DensityOp& rho, const SolverOptions& opts) {
  if (rho.sig().parties() != 2) throw InvalidArgument("conditional lower bound: bipartite state required");
  const ERSolution sol = relent_entanglement(rho, Partition::finest(2), opts);
  const double small = std::max(-conditional_entropy_ext(rho, 0), -conditional_entropy_ext(rho, 1));
  InequalityResult r{"LB-1", small, sol.lower_certificate(), 0.0, false};
  r.violated = r.small_side > r.large_side + kInequalitySlack;
  return r;
}

InequalityResult check_pair_lower_bound(const DensityOp& pure3, int i, int j, const SolverOptions& opts) {
  if (pure3.sig().parties() != 3) throw InvalidArgument("pair lower bound: tripartite state required");
  if (std::abs(pure3.purity() - 1.0) > 1e-8) throw InvalidArgument("pair lower bound: pure state required");
  if (i == j || i < 0 || j < 0 || i > 2 || j > 2) throw InvalidArgument("pair lower bound: bad pair");
  const std::vector<int> keep{std::min(i, j), std::max(i, j)};
  const DensityOp pair = partial_trace(pure3, keep);
  const ERSolution whole = relent_entanglement(pure3, Partition::finest(3), opts);
  const ERSolution part = relent_entanglement(pair, Partition::finest(2), opts);
  InequalityResult r{"LB-2", part.value + von_neumann_entropy(pair), whole.lower_certificate(),
                     std::max(part.gap, 0.0), false};
  r.violated = r.small_side > r.large_side + r.allowance + kInequalitySlack;
  return r;
}

VerifyReport verify_er_inequalities(const VerifySamples& samples, const SolverOptions& opts) {
  VerifyReport report;
  auto push = [&](InequalityResult r) {
    if (r.violated) ++report.violations;
    report.results.push_back(std::move(r));
  };
  for (const auto& rho : samples.upper_bound) {
    push(check_er_upper_bound(rho, Partition::finest(static_cast<int>(rho.sig().parties())), opts));
  }
  for (const auto& s : samples.mixture) {
    push(check_mixture_bound(s.rho, s.sigma, s.p, Partition::finest(static_cast<int>(s.rho.sig().parties())), opts));
  }
  for (const auto& rho : samples.conditional) push(check_conditional_lower_bound(rho, opts));
  for (const auto& rho : samples.pure_tripartite) {
    push(check_pair_lower_bound(rho, 0, 1, opts));
    push(check_pair_lower_bound(rho, 0, 2, opts));
    push(check_pair_lower_bound(rho, 1, 2, opts));
  }
  return report;
}

std::vector<DensityOp> depolarized_sequence(const DensityOp& rho0, int n) {
  std::vector<DensityOp> out;
  const Matrix mixed = DensityOp::maximally_mixed(rho0.sig()).mat();
  for (int k = 1; k <= n; ++k) {
    const double w = 1.0 / k;
    out.push_back(DensityOp::sanitized(rho0.sig(), (1.0 - w) * rho0.mat() + w * mixed));
  }
  return out;
}

std::vector<Theorem2Row> theorem2_demo(const std::vector<DensityOp>& sequence, const DensityOp& rho0,
                                       const Partition& pi, int k_max, const SolverOptions& opts) {
  std::vector<Theorem2Row> rows;
  auto row_for = [&](int k, const DensityOp& state) {
    Theorem2Row row;
    row.k = k;
    row.distance = trace_distance(state, rho0);
    row.qmi = mutual_information(state, pi.groups());
    const auto reg = regularized_estimate(state, pi, k_max, opts);
    row.er = reg.front().per_copy;
    row.er_reg = row.er;
    for (const auto& p : reg) row.er_reg = std::min(row.er_reg, p.per_copy);
    return row;
  };
  for (std::size_t k = 0; k < sequence.size(); ++k) rows.push_back(row_for(static_cast<int>(k + 1), sequence[k]));
  rows.push_back(row_for(0, rho0));
  return rows;
}

}  // namespace qsep
