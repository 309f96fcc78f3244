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
#include <string>
#include <vector>

#include "doctest.h"
#include "qsep/entropy.hpp"
#include "qsep/error.hpp"
#include "qsep/fixtures.hpp"
#include "qsep/relent.hpp"

using namespace qsep;

namespace {

const double kLn2 = std::log(2.0);

DensityOp isotropic(double p) {
  const DensityOp bell = load_fixture("bell");
  return DensityOp::sanitized(bell.sig(), p * bell.mat() + (1 - p) * Matrix::Identity(4, 4) / 4.0);
}

Matrix reconstruct(const ERSolution& s, const DimSig& sig, const Partition& pi) {
  Matrix m = Matrix::Zero(sig.total(), sig.total());
  for (const auto& a : s.atoms) {
    const Vector v = a.atom.vector(sig, pi);
    m += a.weight * v * v.adjoint();
  }
  return m;
}

void check_solution_invariants(const ERSolution& s, const DensityOp& rho, const Partition& pi) {
  double total = 0.0;
  for (const auto& a : s.atoms) {
    CHECK(a.weight >= 0.0);
    total += a.weight;
    for (const auto& f : a.atom.factors) CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.gap >= -1e-8);
  CHECK((reconstruct(s, rho.sig(), pi) - s.sigma.mat()).norm() < 1e-8);
  CHECK(std::abs(relative_entropy(rho, s.sigma).value() - s.value) < 1e-8);
}

}  // namespace

TEST_CASE("partitions") {
  const Partition p({{2, 0}, {1}});
  CHECK(p.size() == 2);
  CHECK(p.parties() == 3);
  CHECK(p.describe() == "0,2|1");
  CHECK(Partition::finest(3).refines(p));
  CHECK_FALSE(p.refines(Partition::finest(3)));
  CHECK(p.refines(Partition::single(3)));
  CHECK_THROWS_AS(Partition({{0}, {0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(Partition({{0}, {2}}), InvalidArgument);
}

TEST_CASE("product LMO") {
  const DimSig sig({2, 2});
  const DensityOp bell = load_fixture("bell");
  const LmoResult r = product_lmo(-bell.mat(), sig, Partition::finest(2));
  CHECK(r.value == doctest::Approx(-0.5).epsilon(1e-10));
  // diagonal functional: the best product vector is the smallest diagonal entry
  const std::vector<double> d{0.3, -0.2, 0.7, 0.1, -0.9, 0.4};
  Matrix g = Matrix::Zero(6, 6);
  for (int i = 0; i < 6; ++i) g(i, i) = d[static_cast<std::size_t>(i)];
  CHECK(product_lmo(g, DimSig({2, 3}), Partition::finest(2)).value == doctest::Approx(-0.9).epsilon(1e-10));
  // a single group gives the smallest eigenvalue
  const DensityOp r6 = random_density(DimSig({2, 3}), 6, 3);
  CHECK(product_lmo(r6.mat(), DimSig({2, 3}), Partition::single(2)).value ==
        doctest::Approx(eigvalsh(r6.mat()).minCoeff()).epsilon(1e-10));
  // the minimizing atom attains the value
  const LmoResult rr = product_lmo(r6.mat(), DimSig({2, 3}), Partition::finest(2));
  const Vector v = rr.atom.vector(DimSig({2, 3}), Partition::finest(2));
  CHECK((v.adjoint() * r6.mat() * v)(0, 0).real() == doctest::Approx(rr.value).epsilon(1e-10));
  CHECK(rr.spread >= 0.0);
}

TEST_CASE("Bell state: ln 2 from both sides") {
  const DensityOp bell = load_fixture("bell");
  const ERSolution s = relent_entanglement(bell, Partition::finest(2));
  check_solution_invariants(s, bell, Partition::finest(2));
  CHECK(std::abs(s.value - kLn2) < 1e-3);
  const InequalityResult ub = check_er_upper_bound(bell, Partition::finest(2));
  const InequalityResult lb = check_conditional_lower_bound(bell);
  CHECK_FALSE(ub.violated);
  CHECK_FALSE(lb.violated);
  CHECK(ub.large_side == doctest::Approx(kLn2));
  CHECK(lb.small_side == doctest::Approx(kLn2));
}

TEST_CASE("closed forms: isotropic two-qubit states, GHZ and W") {
  for (double p : {0.2, 0.6, 0.9}) {
    const DensityOp r = isotropic(p);
    const double f = (1 + 3 * p) / 4;
    const double oracle = f > 0.5 ? kLn2 - binary_entropy(f) : 0.0;
    const ERSolution s = relent_entanglement(r, Partition::finest(2));
    CHECK(s.value == doctest::Approx(oracle).epsilon(1e-5));
    CHECK(s.value >= oracle - 1e-9);
  }
  CHECK(relent_entanglement(load_fixture("ghz"), Partition::finest(3)).value == doctest::Approx(kLn2).epsilon(1e-6));
  const ERSolution w = relent_entanglement(load_fixture("w"), Partition::finest(3));
  check_solution_invariants(w, load_fixture("w"), Partition::finest(3));
  CHECK(w.value == doctest::Approx(std::log(9.0 / 4.0)).epsilon(1e-5));
}

TEST_CASE("separable states have zero relative entropy of entanglement") {
  const DensityOp prod = kron(random_pure(DimSig({2}), 1), random_pure(DimSig({3}), 2));
  CHECK(relent_entanglement(prod, Partition::finest(2)).value <= 1e-5);
  Matrix m = Matrix::Zero(6, 6);
  const double w[3] = {0.5, 0.3, 0.2};
  for (int k = 0; k < 3; ++k) {
    const Vector v = kron_all(std::vector<Vector>{random_unit_vector(2, 10 + k), random_unit_vector(3, 20 + k)});
    m += w[k] * v * v.adjoint();
  }
  const DensityOp mix = DensityOp::sanitized(DimSig({2, 3}), m);
  CHECK(relent_entanglement(mix, Partition::finest(2)).value <= 1e-5);
  CHECK(relent_entanglement(load_fixture("geometric-product"), Partition::finest(2)).value <= 1e-5);
}

TEST_CASE("a single group has nothing to separate") {
  const DensityOp r = random_density(DimSig({2, 2}), 3, 4);
  CHECK(relent_entanglement(r, Partition::single(2)).value <= 1e-6);
}

TEST_CASE("reproducible given the seed") {
  const DensityOp r = random_density(DimSig({2, 2}), 4, 12);
  SolverOptions o;
  o.max_iters = 30;
  const ERSolution a = relent_entanglement(r, Partition::finest(2), o);
  const ERSolution b = relent_entanglement(r, Partition::finest(2), o);
  CHECK(a.value == b.value);
  CHECK(a.gap == b.gap);
  CHECK(a.atoms.size() == b.atoms.size());
}

TEST_CASE("property: coarser partitions give smaller estimates") {
  SolverOptions o;
  o.max_iters = 300;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    const DensityOp r = random_density(DimSig({2, 2, 2}), 2, s);
    const ERSolution fine = relent_entanglement(r, Partition::finest(3), o);
    const ERSolution coarse = relent_entanglement(r, Partition({{0, 1}, {2}}), o);
    CHECK(fine.value >= coarse.value - 2 * (std::max(fine.gap, 0.0) + std::max(coarse.gap, 0.0)) - 1e-9);
  }
}

TEST_CASE("tensor powers") {
  const DensityOp r = random_density(DimSig({2, 3}), 6, 7);
  CHECK((tensor_power_regrouped(r, 1).mat() - r.mat()).norm() == 0.0);
  const DensityOp r2 = tensor_power_regrouped(r, 2);
  CHECK(r2.sig().dims() == std::vector<int>{4, 9});
  const Matrix a = marginal(r, 0).mat();
  CHECK((marginal(r2, 0).mat() - kron(a, a)).norm() < 1e-12);
  // brute-force element check of the party-major ordering
  const int a0 = 1, a1 = 0, b0 = 2, b1 = 1;
  const int c0 = 0, c1 = 1, d0 = 1, d1 = 2;
  const Complex direct = r.mat()(a0 * 3 + b0, c0 * 3 + d0) * r.mat()(a1 * 3 + b1, c1 * 3 + d1);
  CHECK(std::abs(r2.mat()((a0 * 2 + a1) * 9 + b0 * 3 + b1, (c0 * 2 + c1) * 9 + d0 * 3 + d1) - direct) < 1e-14);
  try {
    tensor_power_regrouped(r, 5);
    FAIL("no overflow error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("k_max = 4") != std::string::npos);
  }
}

TEST_CASE("regularized estimate of the Bell state") {
  const auto pts = regularized_estimate(load_fixture("bell"), Partition::finest(2), 2);
  REQUIRE(pts.size() == 2);
  for (const auto& p : pts) CHECK(std::abs(p.per_copy - kLn2) < 2e-3);
}

TEST_CASE("property: two copies never beat one by more than the slack") {
  SolverOptions o;
  o.max_iters = 150;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    const DensityOp r = random_density(DimSig({2, 2}), 2, s);
    const auto pts = regularized_estimate(r, Partition::finest(2), 2, o);
    CHECK(pts[1].per_copy <= pts[0].per_copy + 1e-6);
  }
}

TEST_CASE("energy-constrained sweep on the Bell state") {
  const DensityOp bell = load_fixture("bell");
  const std::vector<HamiltonianSpec> hams(2, HamiltonianSpec::linear(1.0));
  const std::vector<double> es{0.2, 0.5, 0.8, 1.0, 1.5};
  const auto sweep = energy_sweep(bell, Partition::finest(2), hams, es);
  for (std::size_t i = 1; i < sweep.size(); ++i) CHECK(sweep[i].value <= sweep[i - 1].value + 1e-12);
  CHECK(std::abs(sweep.back().value - kLn2) < 1e-3);
  // energy constraint is respected
  const Matrix h = total_hamiltonian(bell.sig(), hams);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    CHECK((h * sweep[i].sigma.mat()).trace().real() <= es[i] + 1e-9);
  }
  // below the unconstrained optimum's energy the constraint bites
  CHECK(sweep[0].value > kLn2 + 1e-3);
  CHECK_THROWS_AS(energy_constrained_er(bell, Partition::finest(2), {{HamiltonianSpec::linear(1.0).with_offset(1.0),
                                                                     HamiltonianSpec::linear(1.0)}, 0.5}),
                  InvalidArgument);
}

TEST_CASE("FDA experiment on the 3x3 fixture") {
  const DensityOp r = load_fixture("gibbs-3x3");
  SolverOptions o;
  o.max_iters = 300;
  const FdaReport rep = fda_experiment(r, spectral_projector_sequence(r, {1, 2, 3}), {2}, o);
  CHECK(rep.violations == 0);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows.back().c_k == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(rep.last_change.size() == 1);
  CHECK(rep.last_change[0].second < 0.01);
}

TEST_CASE("inequality verifiers") {
  CHECK(verify_er_inequalities({}).results.empty());
  SolverOptions o;
  o.max_iters = 200;
  VerifySamples samples;
  samples.upper_bound.push_back(random_density(DimSig({3, 3}), 9, 1));
  samples.mixture.push_back({load_fixture("bell"), random_density(DimSig({2, 2}), 4, 2), 0.4});
  samples.conditional.push_back(random_density(DimSig({2, 2}), 2, 3));
  samples.pure_tripartite.push_back(random_pure(DimSig({2, 2, 2}), 4));
  const VerifyReport rep = verify_er_inequalities(samples, o);
  CHECK(rep.results.size() == 6);
  CHECK(rep.violations == 0);
  CHECK_THROWS_AS(check_pair_lower_bound(random_density(DimSig({2, 2, 2}), 2, 5), 0, 1), InvalidArgument);
}

TEST_CASE("depolarized sequence and the convergence demo") {
  const DensityOp bell = load_fixture("bell");
  const auto seq = depolarized_sequence(bell, 4);
  const double t1 = trace_distance(seq[0], bell);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    CHECK(trace_distance(seq[k], bell) == doctest::Approx(t1 / static_cast<double>(k + 1)).epsilon(1e-10));
  }
  const auto rows = theorem2_demo(seq, bell, Partition::finest(2), 1);
  REQUIRE(rows.size() == 5);
  CHECK(rows.back().k == 0);
  CHECK(std::abs(rows.back().er - kLn2) < 1e-3);
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) CHECK(rows[k].er >= rows[k - 1].er - 1e-9);
}
