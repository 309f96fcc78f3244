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

#include <functional>
#include <string>
#include <vector>

#include "qsep/qmat.hpp"

namespace qsep {

struct Fixture {
  std::string name;
  int version = 1;
  std::string description;
  /// One Hamiltonian literal per party, used by energy-constrained runs.
  std::vector<std::string> hamiltonians;
  std::function<DensityOp()> make;
};

const std::vector<Fixture>& fixture_registry();

/// Accepts "name" (latest version) or "name@v".
const Fixture& find_fixture(const std::string& ref);
DensityOp load_fixture(const std::string& ref);

/// "name@v  description" lines, sorted by name.
std::vector<std::string> list_fixtures();

/// sum_i sqrt(w_i) |i...i>
Vector schmidt_diagonal(int parties, const std::vector<double>& w);

/// p |psi><psi| + (1 - p) gamma^{(x) n} where gamma is geometric(q) cut to d
/// levels and psi = schmidt_diagonal(n, diag gamma). Every marginal equals
/// gamma.
DensityOp gibbs_marginal_state(int parties, int d, double q, double p);

}  // namespace qsep
