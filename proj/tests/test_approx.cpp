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
#include "qsep/approx.hpp"
#include "qsep/entropy.hpp"
#include "qsep/error.hpp"
#include "qsep/fixtures.hpp"
#include "qsep/spectra.hpp"

using namespace qsep;

namespace {

Vector basis(int d, int i) { return Vector::Unit(d, i); }

}  // namespace

TEST_CASE("lambda map: full rank is the identity") {
  const DensityOp r = random_density(DimSig({2, 3}), 6, 3);
  const Truncation t = lambda_map(r, {0, 1}, 3);
  CHECK((t.state.mat() - r.mat()).norm() < 1e-10);
  CHECK(t.plan.c_r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((t.plan.q * t.plan.q - t.plan.q).norm() < 1e-10);
}

TEST_CASE("lambda map: Bell state collapses to one Schmidt vector") {
  const Truncation t = lambda_map(load_fixture("bell"), {0}, 1);
  const Vector e00 = basis(4, 0);
  CHECK((t.state.mat() - e00 * e00.adjoint()).norm() < 1e-10);
  CHECK(t.plan.c_r == doctest::Approx(0.5));
}

TEST_CASE("lambda map: diagonal block restriction") {
  // marginal spectrum (1/2, 1/4, 1/4) on A, B a qubit
  const std::vector<double> w{0.3, 0.2, 0.15, 0.1, 0.15, 0.1};
  const DensityOp r = DensityOp::diagonal(DimSig({3, 2}), w);
  const Truncation t = lambda_map(r, {0}, 2);
  // keeps levels 0 and one of the tied levels 1,2 of A, renormalized
  double kept = 0.0;
  for (int i = 0; i < 6; ++i) kept += t.state.mat()(i, i).real();
  CHECK(kept == doctest::Approx(1.0));
  CHECK(t.state.mat()(0, 0).real() == doctest::Approx(0.3 / 0.75).epsilon(1e-12));
  CHECK(t.plan.c_r == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("lambda map rejects annihilating truncations and bad ranks") {
  CHECK_THROWS_AS(lambda_map(load_fixture("bell"), {0}, 3), InvalidArgument);
  CHECK_THROWS_AS(lambda_map(load_fixture("bell"), {2}, 1), InvalidArgument);
}

TEST_CASE("property: lambda map is idempotent on its output") {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const DensityOp r = random_density(DimSig({3, 3}), 9, s);
    const Truncation t = lambda_map(r, {0, 1}, 2);
    const DensityOp twice = apply_plan(t.state, t.plan);
    CHECK((twice.mat() - t.state.mat()).norm() < 1e-10);
  }
}

TEST_CASE("phi channels") {
  const DensityOp r = random_density(DimSig({2, 3}), 6, 9);
  CHECK((phi_channels_map(r, {0, 1}, 3).mat() - r.mat()).norm() < 1e-10);
  const DensityOp prod = kron(DensityOp::pure(DimSig({2}), basis(2, 1)), DensityOp::pure(DimSig({3}), basis(3, 2)));
  CHECK((phi_channels_map(prod, {0, 1}, 1).mat() - prod.mat()).norm() < 1e-10);
  // Bell, both sides, r = 1: 1/2 |00><00| plus the rerouted cross terms, all landing on |00>
  const DensityOp out = phi_channels_map(load_fixture("bell"), {0, 1}, 1);
  CHECK(out.mat().trace().real() == doctest::Approx(1.0).epsilon(1e-10));
  const Vector e00 = basis(4, 0);
  CHECK((out.mat() - e00 * e00.adjoint()).norm() < 1e-10);
}

TEST_CASE("property: QMI does not increase under local channels") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const DensityOp r = random_density(DimSig({3, 3}), 1 + static_cast<int>(s % 9), s);
    for (int rank = 1; rank <= 3; ++rank) {
      CHECK(mutual_information(phi_channels_map(r, {0, 1}, rank)) <= mutual_information(r) + 1e-8);
    }
    for (const auto& ch : channel_registry()) {
      CHECK(mutual_information(apply_product_channel(r, {ch, ch})) <= mutual_information(r) + 1e-8);
    }
  }
}

TEST_CASE("p-ineq examples") {
  const DensityOp bell = load_fixture("bell");
  const InequalityCheck both = p_ineq_check(make_plan(bell, {0, 1}, 1), bell);
  CHECK(both.lhs == doctest::Approx(0.5));
  CHECK(both.rhs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(both.holds);
  const DensityOp r = random_density(DimSig({3, 2}), 6, 4);
  const InequalityCheck one = p_ineq_check(make_plan(r, {0}, 2), r);
  CHECK(one.lhs == doctest::Approx(one.rhs).epsilon(1e-12));
}

TEST_CASE("gentle measurement bound examples") {
  const GentleCheck full = gentle_bound_check(random_density(DimSig({2, 2}), 4, 1), {0, 1}, 2);
  CHECK(full.distance < 1e-10);
  CHECK(full.bound_p == doctest::Approx(0.0).epsilon(1e-8));
  const GentleCheck bell = gentle_bound_check(load_fixture("bell"), {0}, 1);
  CHECK(bell.holds);
  CHECK(bell.distance <= 2 * std::sqrt(0.5) + 1e-12);
  // eigenvalue oracle: rho - |00><00| has eigenvalues {(-1 +- sqrt 2)/2, 0, 0}
  CHECK(bell.distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("energy growth condition examples") {
  const DensityOp bell = load_fixture("bell");
  const HamiltonianSpec g = HamiltonianSpec::explicit_levels({0.0, 1.0});
  const InequalityCheck c = energy_growth_check(bell, make_plan(bell, {0, 1}, 1), {g, g});
  CHECK(c.lhs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c.holds);
  // the rhs is E_S / c_r
  CHECK(c.rhs == doctest::Approx(1.0 / 0.5));
  const DensityOp r = random_density(DimSig({3, 3}), 9, 2);
  const InequalityCheck full = energy_growth_check(r, make_plan(r, {0, 1}, 3), {HamiltonianSpec::linear(1.0)});
  CHECK(full.lhs == doctest::Approx(full.rhs).epsilon(1e-10));
}

TEST_CASE("property: truncation inequalities hold jointly on random 3x3x3 states") {
  int violations = 0;
  const std::vector<HamiltonianSpec> g{HamiltonianSpec::linear(1.0), HamiltonianSpec::log_power(1.0, 2.0),
                                       HamiltonianSpec::linear(0.5)};
  for (std::uint64_t s = 1; s <= 100; ++s) {
    const DensityOp r = random_density(DimSig({3, 3, 3}), 1 + static_cast<int>(s % 27), s);
    double prev_eps = 2.0, prev_c = 0.0;
    for (int rank = 1; rank <= 3; ++rank) {
      const TruncationPlan plan = make_plan(r, {0, 1, 2}, rank);
      violations += p_ineq_check(plan, r).holds ? 0 : 1;
      violations += gentle_bound_check(r, {0, 1, 2}, rank).holds ? 0 : 1;
      violations += energy_growth_check(r, plan, g).holds ? 0 : 1;
      double tails = 0.0;
      for (double d : plan.discarded) tails += d;
      const double eps = std::sqrt(tails);
      violations += eps <= prev_eps + 1e-12 ? 0 : 1;
      violations += plan.c_r >= prev_c - 1e-12 ? 0 : 1;
      prev_eps = eps;
      prev_c = plan.c_r;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("Y envelope") {
  const SpectrumFamily geo = SpectrumFamily::geometric(0.5);
  const FAWitness w = build_fa_witness(geo);
  BoundParams tmpl{1.0, 1.0, 1, 0.0, {}, 0};
  const auto rows = y_envelope({geo}, {w}, tmpl, {1, 2, 3, 4, 6, 8, 12});
  for (const auto& row : rows) CHECK(row.eps == doctest::Approx(std::sqrt(std::pow(2.0, -row.r))).epsilon(1e-10));
  double prev = 1e300;
  for (const auto& row : rows) {
    REQUIRE(row.y.has_value());
    CHECK(*row.y < prev);
    prev = *row.y;
  }
  // an exhausted explicit spectrum gives eps = 0 and Y = 0
  const auto ex = y_envelope({SpectrumFamily::explicit_list({0.5, 0.3, 0.2})}, {w}, tmpl, {3});
  CHECK(ex[0].eps == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*ex[0].y == doctest::Approx(0.0).epsilon(1e-10));
  // undefined where the tail is too heavy
  const auto heavy = y_envelope({SpectrumFamily::geometric(0.9)}, {w}, tmpl, {1});
  CHECK_FALSE(heavy[0].y.has_value());
}

TEST_CASE("local channels") {
  const LocalChannel dep = LocalChannel::parse("depolarizing:0.3");
  CHECK(dep.kind == LocalChannel::Kind::kDepolarizing);
  CHECK(LocalChannel::parse("identity").kind == LocalChannel::Kind::kIdentity);
  CHECK_THROWS_AS(LocalChannel::parse("depolarizing:1.5"), InvalidArgument);
  CHECK_THROWS_AS(LocalChannel::parse("amplitude:0.1"), InvalidArgument);
  const DensityOp r = random_density(DimSig({2, 3}), 6, 5);
  // depolarizing: (1-p) rho + p tr_A rho (x) I/d on party 0
  const DensityOp out = apply_local_channel(r, 0, dep);
  const Matrix oracle = 0.7 * r.mat() + 0.3 * kron(Matrix::Identity(2, 2) / 2.0, partial_trace(r, std::vector<int>{1}).mat());
  CHECK((out.mat() - oracle).norm() < 1e-12);
  // full dephasing kills coherences of that party
  const DensityOp deph = apply_local_channel(r, 1, LocalChannel::parse("dephasing:1"));
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(std::abs(deph.mat()(a * 3 + i, a * 3 + j)) < 1e-12);
}

TEST_CASE("truncation experiment harness") {
  const DensityOp prod = load_fixture("geometric-product");
  const StateFunction qmi = [](const DensityOp& s) { return mutual_information(s); };
  const ApproxReport a = theorem1_experiment(prod, qmi, {0, 1}, {1, 2, 3, 4});
  for (const auto& row : a.rows) CHECK(row.diff < 1e-9);
  const StateFunction constant = [](const DensityOp&) { return 1.0; };
  for (const auto& row : theorem1_experiment(load_fixture("ghz"), constant, {0, 1, 2}, {1, 2}).rows) {
    CHECK(row.diff == 0.0);
  }
  // depolarized GHZ mixture with an envelope
  const DensityOp ghz = load_fixture("ghz");
  const DensityOp mix = DensityOp::sanitized(ghz.sig(), 0.8 * ghz.mat() + 0.2 * Matrix::Identity(8, 8) / 8.0);
  const std::vector<LocalChannel> dep(3, LocalChannel::parse("depolarizing:0.3"));
  const StateFunction f = [&](const DensityOp& s) { return mutual_information(apply_product_channel(s, dep)); };
  EnvelopeInputs env{2.0, 3.0, 2, {HamiltonianSpec::linear(1.0), HamiltonianSpec::linear(1.0)}};
  const ApproxReport rep = theorem1_experiment(mix, f, {0, 1, 2}, {1, 2}, env);
  CHECK(rep.violations == 0);
  CHECK(rep.rows.back().diff < 1e-10);
}
