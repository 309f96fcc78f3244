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


#include <cmath>
#include <vector>

#include "doctest.h"
#include "qsep/error.hpp"
#include "qsep/qmat.hpp"
#include "qsep/qmat_json.hpp"

using namespace qsep;

namespace {

// partial trace by brute-force index loops over a bipartition A|B
Matrix trace_out_second(const Matrix& m, int da, int db) {
  Matrix out = Matrix::Zero(da, da);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      for (int k = 0; k < db; ++k) out(i, j) += m(i * db + k, j * db + k);
  return out;
}

Matrix trace_out_first(const Matrix& m, int da, int db) {
  Matrix out = Matrix::Zero(db, db);
  for (int i = 0; i < db; ++i)
    for (int j = 0; j < db; ++j)
      for (int k = 0; k < da; ++k) out(i, j) += m(k * db + i, k * db + j);
  return out;
}

Matrix swap_operator(int da, int db) {
  Matrix s = Matrix::Zero(da * db, da * db);
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b) s(b * da + a, a * db + b) = 1.0;
  return s;
}

}  // namespace

TEST_CASE("density operators validate their invariants") {
  Matrix m = Matrix::Identity(2, 2) / 2.0;
  CHECK_NOTHROW(DensityOp(DimSig({2}), m));
  m(0, 1) = 0.3;
  try {
    DensityOp(DimSig({2}), m);
    FAIL("accepted a non-Hermitian matrix");
  } catch (const InvariantViolation& e) {
    CHECK(std::string(e.what()).find("ermitian") != std::string::npos);
  }
  CHECK_THROWS_AS(DensityOp(DimSig({3}), Matrix::Identity(2, 2) / 2.0), InvariantViolation);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  CHECK_THROWS_AS(DensityOp(DimSig({2}), neg), InvariantViolation);
  CHECK_THROWS_AS(DensityOp(DimSig({2}), Matrix::Identity(2, 2)), InvariantViolation);
}

TEST_CASE("partial trace agrees with index loops") {
  const DensityOp rho = random_density(DimSig({2, 3}), 6, 11);
  const std::vector<int> a{0};
  const std::vector<int> b{1};
  CHECK((partial_trace(rho, a).mat() - trace_out_second(rho.mat(), 2, 3)).norm() < 1e-12);
  CHECK((partial_trace(rho, b).mat() - trace_out_first(rho.mat(), 2, 3)).norm() < 1e-12);
  CHECK((marginal(rho, 1).mat() - trace_out_first(rho.mat(), 2, 3)).norm() < 1e-12);
}

TEST_CASE("partial trace of three parties composes") {
  const DensityOp rho = random_density(DimSig({2, 3, 2}), 4, 5);
  const std::vector<int> ab{0, 1};
  const std::vector<int> a{0};
  const DensityOp direct = partial_trace(rho, a);
  const DensityOp twostep = partial_trace(partial_trace(rho, ab), a);
  CHECK((direct.mat() - twostep.mat()).norm() < 1e-12);
  // keeping parties {0,2}: trace the middle factor by hand
  Matrix oracle = Matrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
          for (int m = 0; m < 3; ++m) oracle(i * 2 + k, j * 2 + l) += rho.mat()((i * 3 + m) * 2 + k, (j * 3 + m) * 2 + l);
  const std::vector<int> ac{0, 2};
  CHECK((partial_trace(rho, ac).mat() - oracle).norm() < 1e-12);
}

TEST_CASE("kron of states and vectors") {
  const DensityOp a = random_density(DimSig({2}), 2, 1);
  const DensityOp b = random_density(DimSig({3}), 3, 2);
  const DensityOp ab = kron(a, b);
  CHECK(ab.sig().dims() == std::vector<int>{2, 3});
  CHECK(std::abs(ab.mat()(1 * 3 + 2, 0 * 3 + 1) - a.mat()(1, 0) * b.mat()(2, 1)) < 1e-14);
  CHECK((partial_trace(ab, std::vector<int>{0}).mat() - a.mat()).norm() < 1e-12);
}

TEST_CASE("permute_parties matches the swap operator") {
  const DensityOp rho = random_density(DimSig({2, 3}), 6, 3);
  const std::vector<int> perm{1, 0};
  const Matrix s = swap_operator(2, 3);
  CHECK((permute_parties(rho.mat(), rho.sig(), perm) - s * rho.mat() * s.adjoint()).norm() < 1e-12);
  const Vector v = random_unit_vector(6, 9);
  CHECK((permute_parties(v, rho.sig(), perm) - s * v).norm() < 1e-12);
}

TEST_CASE("permute_parties round trip") {
  const DimSig sig({2, 3, 2});
  const DensityOp rho = random_density(sig, 12, 4);
  const std::vector<int> perm{2, 0, 1};
  const std::vector<int> inverse{1, 2, 0};
  const Matrix p = permute_parties(rho.mat(), sig, perm);
  const Matrix back = permute_parties(p, DimSig({2, 2, 3}), inverse);
  CHECK((back - rho.mat()).norm() < 1e-12);
}

TEST_CASE("trace distance") {
  Vector e0 = Vector::Zero(2);
  e0(0) = 1.0;
  Vector e1 = Vector::Zero(2);
  e1(1) = 1.0;
  CHECK(trace_distance(DensityOp::pure(DimSig({2}), e0), DensityOp::pure(DimSig({2}), e1)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> p{0.5, 0.3, 0.2};
  const std::vector<double> q{0.2, 0.2, 0.6};
  CHECK(trace_distance(DensityOp::diagonal(DimSig({3}), p), DensityOp::diagonal(DimSig({3}), q)) ==
        doctest::Approx(0.4).epsilon(1e-12));
  const DensityOp r = random_density(DimSig({4}), 4, 8);
  CHECK(trace_distance(r, r) < 1e-12);
}

TEST_CASE("eigh returns nonincreasing eigenvalues and an orthonormal basis") {
  const DensityOp r = random_density(DimSig({5}), 5, 6);
  const SpectralDecomp d = eigh(r.mat());
  for (int i = 1; i < 5; ++i) CHECK(d.values(i - 1) >= d.values(i));
  CHECK((d.vectors.adjoint() * d.vectors - Matrix::Identity(5, 5)).norm() < 1e-12);
  CHECK((d.vectors * d.values.cast<Complex>().asDiagonal() * d.vectors.adjoint() - r.mat()).norm() < 1e-12);
}

TEST_CASE("top projector keeps the largest eigenvalues") {
  const std::vector<double> w{0.1, 0.6, 0.3};
  const DensityOp r = DensityOp::diagonal(DimSig({3}), w);
  const Matrix p = top_projector(r, 2);
  CHECK(std::abs(p(1, 1) - 1.0) < 1e-12);
  CHECK(std::abs(p(2, 2) - 1.0) < 1e-12);
  CHECK(std::abs(p(0, 0)) < 1e-12);
  CHECK((p * p - p).norm() < 1e-12);
}

TEST_CASE("embed_local is I (x) op (x) I") {
  const DimSig sig({2, 3, 2});
  Matrix op = random_density(DimSig({3}), 3, 1).mat();
  const Matrix expected = kron(kron(Matrix::Identity(2, 2), op), Matrix::Identity(2, 2));
  CHECK((embed_local(op, sig, 1) - expected).norm() < 1e-12);
}

TEST_CASE("sanitized clips tiny negative eigenvalues and renormalizes") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0 + 1e-13;
  m(1, 1) = -1e-13;
  const DensityOp s = DensityOp::sanitized(DimSig({2}), m);
  CHECK(std::abs(s.mat().trace().real() - 1.0) < 1e-14);
  CHECK(eigvalsh(s.mat()).minCoeff() >= 0.0);
}

TEST_CASE("random states are reproducible from the seed") {
  const DensityOp a = random_density(DimSig({2, 2}), 2, 42);
  const DensityOp b = random_density(DimSig({2, 2}), 2, 42);
  const DensityOp c = random_density(DimSig({2, 2}), 2, 43);
  CHECK((a.mat() - b.mat()).norm() == 0.0);
  CHECK((a.mat() - c.mat()).norm() > 1e-3);
  CHECK(eigvalsh(a.mat()).cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("state JSON round trip is exact") {
  const DensityOp a = random_density(DimSig({2, 3}), 3, 77);
  const DensityOp b = state_from_json(nlohmann::json::parse(state_to_json(a).dump()));
  CHECK((a.mat() - b.mat()).norm() == 0.0);
  CHECK(a.sig() == b.sig());
}

TEST_CASE("state JSON rejects a dims product mismatch") {
  nlohmann::json j = state_to_json(DensityOp::maximally_mixed(DimSig({2, 2})));
  j["dims"] = {2, 3};
  CHECK_THROWS_AS(state_from_json(j), InvariantViolation);
}
