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
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "doctest.h"
#include "qsep/csv.hpp"
#include "qsep/error.hpp"
#include "qsep/fixtures.hpp"
#include "qsep/qmat_json.hpp"
#include "qsep/runner.hpp"

using namespace qsep;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("qsep_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

RunRecord run_json(const std::string& text, int jobs = 1) {
  return run(ExperimentConfig::from_json(json::parse(text)), jobs);
}

std::string usage_message(const std::string& text) {
  try {
    run_json(text);
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("shortest round-trip doubles") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  for (double v : {M_PI, 1e-300, 6.02214076e23, -2.5e-7, std::log(2.0)}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("csv tables") {
  CsvTable t({"a", "b"});
  t.add_row({"1", "x,y"});
  t.add_row({cell(0.5), "say \"hi\""});
  CHECK(t.str() == "a,b\n1,\"x,y\"\n0.5,\"say \"\"hi\"\"\"\n");
  CHECK_THROWS_AS(t.add_row({"1"}), InvalidArgument);
}

TEST_CASE("fixtures are named and versioned") {
  const auto lines = list_fixtures();
  CHECK(lines.size() == fixture_registry().size());
  for (const char* name : {"bell", "ghz", "w", "maximally-mixed", "geometric-product", "gibbs-3x3", "gibbs-3party"}) {
    CHECK_NOTHROW(load_fixture(name));
    CHECK_NOTHROW(load_fixture(std::string(name) + "@1"));
    CHECK(find_fixture(name).hamiltonians.size() == load_fixture(name).sig().parties());
  }
  CHECK_THROWS_AS(load_fixture("bell@7"), InvalidArgument);
  CHECK_THROWS_AS(load_fixture("nothing"), InvalidArgument);
  // every marginal of the Gibbs-marginal fixtures is the truncated geometric state
  const DensityOp r = load_fixture("gibbs-3party");
  for (int s = 0; s < 3; ++s) CHECK((marginal(r, s).mat() - marginal(r, 0).mat()).norm() < 1e-12);
  CHECK(std::abs(marginal(r, 0).mat()(0, 1)) < 1e-14);
}

TEST_CASE("state files round-trip bit for bit") {
  const auto dir = scratch_dir("roundtrip");
  const DensityOp r = random_density(DimSig({2, 3}), 4, 99);
  save_state(r, dir / "s.json");
  const DensityOp back = load_state(dir / "s.json");
  CHECK((back.mat() - r.mat()).norm() == 0.0);
}

TEST_CASE("invalid state files are rejected with the failing invariant") {
  const auto dir = scratch_dir("invalid");
  {
    std::ofstream f(dir / "nh.json");
    f << R"({"dims":[2],"re":[[0.5,0.2],[0.0,0.5]]})";
  }
  try {
    load_state(dir / "nh.json");
    FAIL("accepted a non-Hermitian state");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("ermitian") != std::string::npos);
  }
  {
    std::ofstream f(dir / "dims.json");
    f << R"({"dims":[3],"re":[[0.5,0.0],[0.0,0.5]]})";
  }
  CHECK_THROWS_AS(load_state(dir / "dims.json"), InvariantViolation);
}

TEST_CASE("config errors name the failing field") {
  CHECK(usage_message(R"({"command":"nope"})").find("config.command") != std::string::npos);
  CHECK(usage_message(R"({"command":"zeta","params":{}})").find("params.hamiltonian") != std::string::npos);
  CHECK(usage_message(R"({"command":"gibbs","params":{"hamiltonian":"hamlinear:w=1","energies":[]}})")
            .find("params.energies") != std::string::npos);
  CHECK(usage_message(R"({"command":"er","inputs":{}})").find("inputs.state") != std::string::npos);
  CHECK(usage_message(R"({"command":"er","inputs":{"state":"missing.json"}})").find("inputs.state") !=
        std::string::npos);
  CHECK(usage_message(R"({"command":"zeta","params":{"hamiltonian":"bogus"}})").find("params.hamiltonian") !=
        std::string::npos);
  CHECK(usage_message(R"({"command":"er","inputs":{"state":"fixture:bell"},"params":{"partition":[[0],[0]]}})")
            .find("params.partition") != std::string::npos);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"command":"er","seed":-1})")), UsageError);
}

TEST_CASE("zeta command") {
  const RunRecord rec = run_json(R"({"command":"zeta","params":{"hamiltonian":"hamlogp:a=4,p=2"}})");
  CHECK(rec.ok());
  CHECK(std::abs(std::stod(rec.results.at("extrapolated").get<std::string>()) - 1.0645) < 0.01);
  CHECK(rec.tables.at("").rfind("beta,value\n", 0) == 0);
  const RunRecord div = run_json(R"({"command":"zeta","params":{"hamiltonian":"hamlogp:a=1,p=1"}})");
  CHECK(div.results.at("extrapolated") == "inf");
  CHECK(div.tables.at("").find(",inf\n") != std::string::npos);
}

TEST_CASE("er command dumps the solution") {
  const RunRecord rec = run_json(R"({"command":"er","inputs":{"state":"fixture:bell"}})");
  CHECK(rec.ok());
  const json& s = rec.results.at("solution");
  CHECK(std::abs(s.at("value").get<double>() - std::log(2.0)) < 1e-3);
  CHECK(s.at("gap_kind") == "heuristic");
  double total = 0.0;
  for (const auto& a : s.at("atoms")) {
    total += a.at("weight").get<double>();
    CHECK(a.at("factors").size() == 2);
    CHECK(a.at("factors")[0].at("re").size() == 2);
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("an expectation miss is a violation") {
  const RunRecord rec = run_json(R"({"command":"er","inputs":{"state":"fixture:bell"},
                                     "params":{"expected":0.1,"tolerance":1e-3}})");
  CHECK_FALSE(rec.ok());
}

TEST_CASE("verify with zero samples is an empty passing report") {
  const RunRecord rec = run_json(R"({"command":"verify"})");
  CHECK(rec.ok());
  CHECK(rec.tables.at("") == "check,sample,small,large,allowance,violated\n");
}

TEST_CASE("tables do not depend on the worker count") {
  const std::string cfg = R"({"command":"entropy","params":{"samples":12},"seed":3})";
  const RunRecord a = run_json(cfg, 1);
  const RunRecord b = run_json(cfg, 4);
  CHECK(a.ok());
  CHECK(a.tables == b.tables);
  const RunRecord c = run_json(R"({"command":"entropy","params":{"samples":12},"seed":4})", 1);
  CHECK(a.tables != c.tables);
}

TEST_CASE("gibbs command with lemma check and bound table") {
  const RunRecord rec = run_json(R"({"command":"gibbs","params":{"hamiltonian":"hamlinear:w=1","energies":[0.5,1,4],
      "lemma1":true,"bound":{"C":1,"D":1,"m":1,"E":1,"eps":[0.01,0.1]}}})");
  CHECK(rec.ok());
  CHECK(rec.errors.empty());
  CHECK(rec.tables.count("_lemma1") == 1);
  CHECK(rec.tables.count("_bound") == 1);
  CHECK(rec.tables.at("").find("\n1,0.693147180") != std::string::npos);
}

TEST_CASE("numeric failures are recorded per cell") {
  const RunRecord rec = run_json(R"({"command":"gibbs","params":{"hamiltonian":"hamlinear:w=1","energies":[-1,1]}})");
  CHECK(rec.ok());
  REQUIRE(rec.errors.size() == 1);
  CHECK(rec.errors[0].find("infeasible energy") != std::string::npos);
}

TEST_CASE("records are written to the output directory") {
  const auto dir = scratch_dir("record");
  const RunRecord rec = run_json(R"({"command":"zeta","params":{"hamiltonian":"hamlogp:a=1,p=3"}})");
  save_record(rec, "z", dir);
  CHECK(std::filesystem::exists(dir / "z.csv"));
  std::ifstream in(dir / "z.json");
  const json j = json::parse(in);
  CHECK(j.at("version") == version_string());
  CHECK(j.at("config").at("command") == "zeta");
}
