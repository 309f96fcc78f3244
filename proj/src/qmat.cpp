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

#include "qsep/qmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "qsep/error.hpp"

namespace qsep {

namespace {

constexpr double kHermitianInputTol = 1e-8;

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Mixed-radix digits of a flat basis index.
std::vector<int> digits_of(int index, const std::vector<int>& dims) {
  std::vector<int> out(dims.size());
  for (int s = static_cast<int>(dims.size()) - 1; s >= 0; --s) {
    out[s] = index % dims[s];
    index /= dims[s];
  }
  return out;
}

std::vector<int> sorted_keep(std::span<const int> keep, std::size_t parties) {
  if (keep.empty()) throw InvalidArgument("no subsystem kept");
  std::vector<int> k(keep.begin(), keep.end());
  std::sort(k.begin(), k.end());
  if (std::adjacent_find(k.begin(), k.end()) != k.end()) {
    throw InvalidArgument("duplicate subsystem index in keep set");
  }
  if (k.front() < 0 || k.back() >= static_cast<int>(parties)) {
    throw InvalidArgument("subsystem index out of range");
  }
  return k;
}

void canonicalize_cluster(Matrix& vectors, int begin, int end) {
  const int n = static_cast<int>(vectors.rows());
  const int width = end - begin;
  const Matrix block = vectors.middleCols(begin, width);
  Matrix chosen(n, width);
  int found = 0;
  for (int i = 0; i < n && found < width; ++i) {
    Vector w = block * block.row(i).adjoint();  // P e_i
    for (int j = 0; j < found; ++j) {
      w -= chosen.col(j) * chosen.col(j).dot(w);
    }
    const double norm = w.norm();
    if (norm > 1e-6) chosen.col(found++) = w / norm;
  }
  if (found == width) vectors.middleCols(begin, width) = chosen;
}

void fix_phase(Eigen::Ref<Vector> v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double mag = std::abs(v(k));
    if (mag > 1e-8) {
      v *= std::conj(v(k)) / mag;
      v(k) = Complex(std::abs(v(k)), 0.0);
      return;
    }
  }
}

}  // namespace

DimSig::DimSig(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw InvalidArgument("dimension signature is empty");
  total_ = 1;
  for (int d : dims_) {
    if (d < 1) throw InvalidArgument("local dimension must be >= 1");
    total_ *= d;
  }
}

DimSig DimSig::select(std::span<const int> keep) const {
  auto k = sorted_keep(keep, dims_.size());
  std::vector<int> out;
  out.reserve(k.size());
  for (int s : k) out.push_back(dims_[s]);
  return DimSig(std::move(out));
}

DimSig DimSig::concat(const DimSig& other) const {
  std::vector<int> out = dims_;
  out.insert(out.end(), other.dims_.begin(), other.dims_.end());
  return DimSig(std::move(out));
}

StateResiduals inspect_state(const Matrix& m) {
  StateResiduals r;
  if (m.rows() != m.cols()) {
    r.hermiticity = std::numeric_limits<double>::infinity();
    return r;
  }
  r.hermiticity = max_abs(m - m.adjoint());
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().size() ? es.eigenvalues().minCoeff() : 0.0;
  r.trace_error = std::abs(m.trace().real() - 1.0);
  return r;
}

DensityOp::DensityOp(DimSig sig, Matrix mat) : sig_(std::move(sig)), mat_(std::move(mat)) {
  if (mat_.rows() != sig_.total() || mat_.cols() != sig_.total()) {
    std::ostringstream os;
    os << "matrix is " << mat_.rows() << "x" << mat_.cols() << " but dims product is "
       << sig_.total();
    throw InvariantViolation(os.str());
  }
  const StateResiduals r = inspect_state(mat_);
  if (r.hermiticity > kHermitianTol) {
    std::ostringstream os;
    os << "not Hermitian: residual " << r.hermiticity << " exceeds " << kHermitianTol;
    throw InvariantViolation(os.str());
  }
  if (r.min_eigenvalue < -kEigenTol) {
    std::ostringstream os;
    os << "not positive semidefinite: minimal eigenvalue " << r.min_eigenvalue;
    throw InvariantViolation(os.str());
  }
  if (r.trace_error > kTraceTol) {
    std::ostringstream os;
    os << "trace differs from 1 by " << r.trace_error;
    throw InvariantViolation(os.str());
  }
  mat_ = 0.5 * (mat_ + mat_.adjoint()).eval();
}

DensityOp DensityOp::sanitized(DimSig sig, Matrix mat) {
  if (mat.rows() != sig.total() || mat.cols() != sig.total()) {
    throw InvalidArgument("matrix size does not match signature");
  }
  Matrix h = 0.5 * (mat + mat.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  RealVector w = es.eigenvalues();
  if (w.minCoeff() < 0.0) {
    w = w.cwiseMax(0.0);
    h = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
    h = 0.5 * (h + h.adjoint()).eval();
  }
  const double tr = h.trace().real();
  if (!(tr > 0.0)) throw InvariantViolation("operator has no positive trace to normalize");
  h /= tr;
  return DensityOp(Trusted{}, std::move(sig), std::move(h));
}

DensityOp DensityOp::pure(DimSig sig, const Vector& psi) {
  if (psi.size() != sig.total()) throw InvalidArgument("vector size does not match signature");
  const double n = psi.norm();
  if (!(n > 0.0)) throw InvalidArgument("zero vector");
  const Vector u = psi / n;
  return DensityOp(Trusted{}, std::move(sig), u * u.adjoint());
}

DensityOp DensityOp::maximally_mixed(DimSig sig) {
  const int d = sig.total();
  Matrix m = Matrix::Identity(d, d) / static_cast<double>(d);
  return DensityOp(Trusted{}, std::move(sig), std::move(m));
}

DensityOp DensityOp::diagonal(DimSig sig, std::span<const double> weights) {
  if (static_cast<int>(weights.size()) != sig.total()) {
    throw InvalidArgument("weight count does not match signature");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidArgument("negative weight");
    sum += w;
  }
  if (!(sum > 0.0)) throw InvalidArgument("weights sum to zero");
  Matrix m = Matrix::Zero(sig.total(), sig.total());
  for (int i = 0; i < sig.total(); ++i) m(i, i) = weights[i] / sum;
  return DensityOp(Trusted{}, std::move(sig), std::move(m));
}

double DensityOp::purity() const { return (mat_ * mat_).trace().real(); }

SpectralDecomp eigh(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("eigh: matrix is not square");
  const double scale = std::max(1.0, max_abs(m));
  if (max_abs(m - m.adjoint()) > kHermitianInputTol * scale) {
    throw InvalidArgument("eigh: matrix is not Hermitian");
  }
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw Error("eigh: eigensolver did not converge");
  const int n = static_cast<int>(h.rows());
  SpectralDecomp out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values(i) = es.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  const double cluster_tol = 1e-10 * std::max(1.0, n ? out.values.cwiseAbs().maxCoeff() : 0.0);
  for (int begin = 0; begin < n;) {
    int end = begin + 1;
    while (end < n && out.values(end - 1) - out.values(end) <= cluster_tol) ++end;
    if (end - begin > 1) canonicalize_cluster(out.vectors, begin, end);
    begin = end;
  }
  for (int i = 0; i < n; ++i) fix_phase(out.vectors.col(i));
  return out;
}

RealVector eigvalsh(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

DensityOp kron(const DensityOp& a, const DensityOp& b) {
  return DensityOp::sanitized(a.sig().concat(b.sig()), kron(a.mat(), b.mat()));
}

Matrix kron_all(std::span<const Matrix> factors) {
  if (factors.empty()) return Matrix::Identity(1, 1);
  Matrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

Vector kron_all(std::span<const Vector> factors) {
  Vector out = Vector::Ones(1);
  for (const auto& f : factors) {
    Vector next(out.size() * f.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * f.size(), f.size()) = out(i) * f;
    out = std::move(next);
  }
  return out;
}

Matrix partial_trace(const Matrix& m, const DimSig& sig, std::span<const int> keep) {
  const auto k = sorted_keep(keep, sig.parties());
  const auto& dims = sig.dims();
  std::vector<bool> kept(dims.size(), false);
  for (int s : k) kept[s] = true;
  int dk = 1;
  int dt = 1;
  for (std::size_t s = 0; s < dims.size(); ++s) (kept[s] ? dk : dt) *= dims[s];

  // full index for each (kept, traced) pair
  std::vector<int> index(static_cast<std::size_t>(dk) * dt);
  for (int full = 0; full < sig.total(); ++full) {
    const auto dig = digits_of(full, dims);
    int ik = 0;
    int it = 0;
    for (std::size_t s = 0; s < dims.size(); ++s) {
      if (kept[s]) ik = ik * dims[s] + dig[s];
      else it = it * dims[s] + dig[s];
    }
    index[static_cast<std::size_t>(ik) * dt + it] = full;
  }
  Matrix out = Matrix::Zero(dk, dk);
  for (int a = 0; a < dk; ++a) {
    for (int b = 0; b < dk; ++b) {
      Complex acc = 0.0;
      for (int t = 0; t < dt; ++t) {
        acc += m(index[static_cast<std::size_t>(a) * dt + t], index[static_cast<std::size_t>(b) * dt + t]);
      }
      out(a, b) = acc;
    }
  }
  return out;
}

DensityOp partial_trace(const DensityOp& rho, std::span<const int> keep) {
  DimSig sub = rho.sig().select(keep);
  return DensityOp::sanitized(std::move(sub), partial_trace(rho.mat(), rho.sig(), keep));
}

DensityOp marginal(const DensityOp& rho, int party) {
  const int keep[] = {party};
  return partial_trace(rho, keep);
}

namespace {

// new flat index for each old flat index
std::vector<int> permutation_map(const DimSig& sig, std::span<const int> perm) {
  const auto& dims = sig.dims();
  if (perm.size() != dims.size()) throw InvalidArgument("permutation size mismatch");
  std::vector<int> check(perm.begin(), perm.end());
  std::sort(check.begin(), check.end());
  for (std::size_t i = 0; i < check.size(); ++i) {
    if (check[i] != static_cast<int>(i)) throw InvalidArgument("not a permutation");
  }
  std::vector<int> out_dims(dims.size());
  for (std::size_t k = 0; k < perm.size(); ++k) out_dims[k] = dims[perm[k]];
  std::vector<int> map(sig.total());
  for (int old = 0; old < sig.total(); ++old) {
    const auto dig = digits_of(old, dims);
    int idx = 0;
    for (std::size_t k = 0; k < perm.size(); ++k) idx = idx * out_dims[k] + dig[perm[k]];
    map[old] = idx;
  }
  return map;
}

}  // namespace

Matrix permute_parties(const Matrix& m, const DimSig& sig, std::span<const int> perm) {
  const auto map = permutation_map(sig, perm);
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < sig.total(); ++i) {
    for (int j = 0; j < sig.total(); ++j) out(map[i], map[j]) = m(i, j);
  }
  return out;
}

Vector permute_parties(const Vector& v, const DimSig& sig, std::span<const int> perm) {
  const auto map = permutation_map(sig, perm);
  Vector out(v.size());
  for (int i = 0; i < sig.total(); ++i) out(map[i]) = v(i);
  return out;
}

double trace_norm(const Matrix& hermitian) {
  return eigvalsh(hermitian).cwiseAbs().sum();
}

double trace_distance(const DensityOp& rho, const DensityOp& sigma) {
  if (!(rho.sig() == sigma.sig())) throw InvalidArgument("trace_distance: signature mismatch");
  return 0.5 * trace_norm(rho.mat() - sigma.mat());
}

Matrix top_projector(const SpectralDecomp& decomp, int r) {
  const int n = static_cast<int>(decomp.values.size());
  if (r < 1 || r > n) throw InvalidArgument("top_projector: rank out of range");
  const auto v = decomp.vectors.leftCols(r);
  return v * v.adjoint();
}

Matrix top_projector(const DensityOp& rho_marginal, int r) {
  return top_projector(eigh(rho_marginal.mat()), r);
}

Matrix embed_local(const Matrix& op, const DimSig& sig, int party) {
  if (party < 0 || party >= static_cast<int>(sig.parties())) {
    throw InvalidArgument("embed_local: party out of range");
  }
  if (op.rows() != sig.dim(party)) throw InvalidArgument("embed_local: operator size mismatch");
  std::vector<Matrix> f;
  for (int s = 0; s < static_cast<int>(sig.parties()); ++s) {
    f.push_back(s == party ? op : Matrix::Identity(sig.dim(s), sig.dim(s)));
  }
  return kron_all(f);
}

namespace {

Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double re = n(gen);
      const double im = n(gen);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

}  // namespace

DensityOp random_density(const DimSig& sig, int rank, std::uint64_t seed) {
  if (rank < 1 || rank > sig.total()) throw InvalidArgument("random_density: rank out of range");
  std::mt19937_64 gen(seed);
  const Matrix x = gaussian_matrix(sig.total(), rank, gen);
  return DensityOp::sanitized(sig, x * x.adjoint());
}

Vector random_unit_vector(int dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Vector v = gaussian_matrix(dim, 1, gen).col(0);
  return v / v.norm();
}

DensityOp random_pure(const DimSig& sig, std::uint64_t seed) {
  return DensityOp::pure(sig, random_unit_vector(sig.total(), seed));
}

}  // namespace qsep
