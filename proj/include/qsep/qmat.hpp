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

// Dense complex-Hermitian linear algebra for multipartite states.
//
// Subsystem indices are 0-based throughout. Composite spaces use the
// usual Kronecker ordering: party 0 is the most significant digit of the
// basis index.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qsep {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Local dimensions d_0..d_{n-1} of a multipartite system.
class DimSig {
 public:
  DimSig() = default;
  explicit DimSig(std::vector<int> dims);

  std::size_t parties() const { return dims_.size(); }
  int dim(std::size_t party) const { return dims_.at(party); }
  const std::vector<int>& dims() const { return dims_; }
  int total() const { return total_; }

  /// Signature of the kept parties, in increasing party order.
  DimSig select(std::span<const int> keep) const;
  DimSig concat(const DimSig& other) const;

  bool operator==(const DimSig& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  int total_ = 1;
};

/// Residuals of a candidate density matrix against the state invariants.
struct StateResiduals {
  double hermiticity = 0.0;     // max |M - M^dagger|
  double min_eigenvalue = 0.0;
  double trace_error = 0.0;     // |Tr M - 1|
};

StateResiduals inspect_state(const Matrix& m);

/// Hermitian, positive semidefinite, unit-trace matrix on a DimSig.
class DensityOp {
 public:
  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kEigenTol = 1e-10;
  static constexpr double kTraceTol = 1e-10;

  /// Validates every invariant; throws InvariantViolation naming the first
  /// failing one and its residual.
  DensityOp(DimSig sig, Matrix mat);

  /// Symmetrize, clip eigenvalues below -1e-12 to zero, renormalize.
  /// Used after every map that produces a state.
  static DensityOp sanitized(DimSig sig, Matrix mat);
  static DensityOp pure(DimSig sig, const Vector& psi);
  static DensityOp maximally_mixed(DimSig sig);
  static DensityOp diagonal(DimSig sig, std::span<const double> weights);

  const DimSig& sig() const { return sig_; }
  const Matrix& mat() const { return mat_; }
  int dim() const { return sig_.total(); }
  double purity() const;

 private:
  struct Trusted {};
  DensityOp(Trusted, DimSig sig, Matrix mat) : sig_(std::move(sig)), mat_(std::move(mat)) {}

  DimSig sig_;
  Matrix mat_;
};

/// Eigenvalues in descending order with orthonormal eigenvectors as columns.
///
/// Degenerate clusters are returned in a canonical basis: the projections of
/// e_0, e_1, ... onto the cluster, Gram-Schmidt orthonormalized in index
/// order. Each vector's first non-negligible component is real positive.
struct SpectralDecomp {
  RealVector values;
  Matrix vectors;
};

SpectralDecomp eigh(const Matrix& m);
RealVector eigvalsh(const Matrix& m);

Matrix kron(const Matrix& a, const Matrix& b);
DensityOp kron(const DensityOp& a, const DensityOp& b);
Matrix kron_all(std::span<const Matrix> factors);
Vector kron_all(std::span<const Vector> factors);

Matrix partial_trace(const Matrix& m, const DimSig& sig, std::span<const int> keep);
DensityOp partial_trace(const DensityOp& rho, std::span<const int> keep);
DensityOp marginal(const DensityOp& rho, int party);

/// Reorders tensor factors: output party k is input party perm[k].
Matrix permute_parties(const Matrix& m, const DimSig& sig, std::span<const int> perm);
Vector permute_parties(const Vector& v, const DimSig& sig, std::span<const int> perm);

double trace_norm(const Matrix& hermitian);
double trace_distance(const DensityOp& rho, const DensityOp& sigma);

/// Rank-r projector onto the eigenvectors of the r largest eigenvalues.
Matrix top_projector(const DensityOp& rho_marginal, int r);
Matrix top_projector(const SpectralDecomp& decomp, int r);

/// op acting on `party`, identity elsewhere.
Matrix embed_local(const Matrix& op, const DimSig& sig, int party);

DensityOp random_density(const DimSig& sig, int rank, std::uint64_t seed);
DensityOp random_pure(const DimSig& sig, std::uint64_t seed);
Vector random_unit_vector(int dim, std::uint64_t seed);

}  // namespace qsep
