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
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "qsep/entropy.hpp"
#include "qsep/error.hpp"
#include "qsep/fixtures.hpp"
#include "qsep/qmat.hpp"

using namespace qsep;

namespace {

const double kLn2 = std::log(2.0);

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

// Tr A log B for full-rank Hermitian B, straight from the eigendecomposition
double trace_a_log_b(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  const Matrix log_b = es.eigenvectors() * es.eigenvalues().array().log().matrix().cast<Complex>().asDiagonal() *
                       es.eigenvectors().adjoint();
  return (a * log_b).trace().real();
}

double chain(const DensityOp& rho) {
  // I(A:B:C) = I(B:C) + I(A:BC)
  const DensityOp bc = partial_trace(rho, std::vector<int>{1, 2});
  return mutual_information(bc) + mutual_information(rho, {{0}, {1, 2}});
}

}  // namespace

TEST_CASE("entropy of the maximally mixed state is ln d") {
  for (int d = 1; d <= 64; ++d) {
    CHECK(std::abs(von_neumann_entropy(DensityOp::maximally_mixed(DimSig({d}))) - std::log(d)) < 1e-10);
  }
}

TEST_CASE("pure states have zero entropy") {
  CHECK(std::abs(von_neumann_entropy(random_pure(DimSig({3, 3}), 4))) < 1e-10);
}

TEST_CASE("binary entropy and g") {
  CHECK(binary_entropy(0.5) == doctest::Approx(kLn2).epsilon(1e-14));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  const double p = 0.2;
  CHECK(binary_entropy(p) == doctest::Approx(-p * std::log(p) - (1 - p) * std::log(1 - p)).epsilon(1e-14));
  for (double x : {0.0, 1e-3, 0.5, 1.0, 7.0}) {
    const double oracle = (x + 1) * std::log(x + 1) - (x > 0 ? x * std::log(x) : 0.0);
    CHECK(g_func(x) == doctest::Approx(oracle).epsilon(1e-13));
  }
  CHECK(eta(0.0) == 0.0);
  CHECK(eta(0.5) == doctest::Approx(0.5 * kLn2));
}

TEST_CASE("relative entropy of a state with itself is zero") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const DensityOp r = random_density(DimSig({2, 3}), 1 + static_cast<int>(s % 6), s);
    CHECK(std::abs(relative_entropy(r, r).value()) < 1e-10);
  }
}

TEST_CASE("relative entropy of commuting states is the classical divergence") {
  const std::vector<double> p{0.5, 0.25, 0.25, 0.0};
  const std::vector<double> q{0.1, 0.2, 0.3, 0.4};
  const double d = relative_entropy(DensityOp::diagonal(DimSig({4}), p), DensityOp::diagonal(DimSig({4}), q)).value();
  CHECK(d == doctest::Approx(kl_divergence(p, q)).epsilon(1e-12));
}

TEST_CASE("relative entropy against the eigendecomposition oracle") {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const DensityOp r = random_density(DimSig({2, 2}), 4, s);
    const DensityOp t = random_density(DimSig({2, 2}), 4, s + 100);
    const double oracle = trace_a_log_b(r.mat(), r.mat()) - trace_a_log_b(r.mat(), t.mat());
    CHECK(relative_entropy(r, t).value() == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("relative entropy is infinite outside the support") {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<double> q{1.0, 0.0};
  CHECK_FALSE(relative_entropy(DensityOp::diagonal(DimSig({2}), p), DensityOp::diagonal(DimSig({2}), q)).is_finite());
  CHECK(relative_entropy(DensityOp::diagonal(DimSig({2}), q), DensityOp::diagonal(DimSig({2}), p)).value() ==
        doctest::Approx(kLn2));
}

TEST_CASE("conditional entropy") {
  const DensityOp bell = load_fixture("bell");
  CHECK(conditional_entropy_ext(bell) == doctest::Approx(-kLn2).epsilon(1e-10));
  const DensityOp a = random_density(DimSig({2}), 2, 1);
  const DensityOp b = random_density(DimSig({3}), 3, 2);
  CHECK(conditional_entropy_ext(kron(a, b), 0) == doctest::Approx(von_neumann_entropy(a)).epsilon(1e-10));
  CHECK(conditional_entropy_ext(kron(a, b), 1) == doctest::Approx(von_neumann_entropy(b)).epsilon(1e-10));
  const DensityOp r = random_density(DimSig({2, 3}), 6, 9);
  const double oracle = von_neumann_entropy(r) - von_neumann_entropy(marginal(r, 1));
  CHECK(conditional_entropy_ext(r, 0) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("mutual information of fixtures") {
  CHECK(mutual_information(load_fixture("ghz")) == doctest::Approx(3 * kLn2).epsilon(1e-10));
  CHECK(mutual_information(load_fixture("bell")) == doctest::Approx(2 * kLn2).epsilon(1e-10));
  CHECK(std::abs(mutual_information(load_fixture("geometric-product"))) < 1e-10);
  const DensityOp w = load_fixture("w");
  const double s1 = binary_entropy(1.0 / 3.0);
  CHECK(mutual_information(w) == doctest::Approx(3 * s1).epsilon(1e-10));
}

TEST_CASE("groupings are validated") {
  const DensityOp r = load_fixture("ghz");
  CHECK_THROWS_AS(mutual_information(r, {{0}, {0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(mutual_information(r, {{0}, {3}}), InvalidArgument);
}

TEST_CASE("property: chain rule on random 2x2x2 states") {
  for (std::uint64_t s = 1; s <= 100; ++s) {
    const DensityOp r = random_density(DimSig({2, 2, 2}), 1 + static_cast<int>(s % 8), s);
    CHECK(std::abs(chain(r) - mutual_information(r)) < 1e-8);
  }
}

TEST_CASE("property: concavity bound and mutual information bound") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0;
  for (std::uint64_t s = 1; s <= 500; ++s) {
    const DimSig sig({2, 2, 2});
    const DensityOp r = random_density(sig, 1 + static_cast<int>(s % 8), s);
    const DensityOp t = random_density(sig, 1 + static_cast<int>((s * 7) % 8), s + 5000);
    const double p = u(gen);
    const DensityOp mix = DensityOp::sanitized(sig, p * r.mat() + (1 - p) * t.mat());
    const double lhs = von_neumann_entropy(mix);
    const double rhs = p * von_neumann_entropy(r) + (1 - p) * von_neumann_entropy(t) + binary_entropy(p);
    if (lhs > rhs + 1e-8) ++failures;
    const double qmi = mutual_information(r);
    double marg[3];
    for (int k = 0; k < 3; ++k) marg[k] = von_neumann_entropy(marginal(r, k));
    for (int skip = 0; skip < 3; ++skip) {
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) sum += k == skip ? 0.0 : marg[k];
      if (qmi > 2 * sum + 1e-8) ++failures;
    }
    // lower side of the concavity bound
    if (lhs < p * von_neumann_entropy(r) + (1 - p) * von_neumann_entropy(t) - 1e-8) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("property: relative entropy is nonnegative and jointly convex on samples") {
  for (std::uint64_t s = 1; s <= 30; ++s) {
    const DimSig sig({3});
    const DensityOp r1 = random_density(sig, 3, s), r2 = random_density(sig, 3, s + 1);
    const DensityOp t1 = random_density(sig, 3, s + 2), t2 = random_density(sig, 3, s + 3);
    const double p = 0.3;
    const DensityOp rm = DensityOp::sanitized(sig, p * r1.mat() + (1 - p) * r2.mat());
    const DensityOp tm = DensityOp::sanitized(sig, p * t1.mat() + (1 - p) * t2.mat());
    const double joint = relative_entropy(rm, tm).value();
    CHECK(joint >= -1e-12);
    CHECK(joint <= p * relative_entropy(r1, t1).value() + (1 - p) * relative_entropy(r2, t2).value() + 1e-10);
  }
}
