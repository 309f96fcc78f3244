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

#include "qsep/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "qsep/error.hpp"
#include "qsep/spectra.hpp"

namespace qsep {

namespace {

std::vector<double> geometric_weights(int d, double q) {
  const TruncatedState t = truncate_to_density(SpectrumFamily::geometric(q), d);
  std::vector<double> w(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) w[static_cast<std::size_t>(i)] = t.state.mat()(i, i).real();
  return w;
}

DensityOp ghz_like(int parties) {
  return DensityOp::pure(DimSig(std::vector<int>(static_cast<std::size_t>(parties), 2)),
                         schmidt_diagonal(parties, std::vector<double>{0.5, 0.5}));
}

DensityOp w_state() {
  Vector v = Vector::Zero(8);
  v(1) = v(2) = v(4) = 1.0 / std::sqrt(3.0);
  return DensityOp::pure(DimSig({2, 2, 2}), v);
}

DensityOp geometric_product() {
  const DensityOp g = truncate_to_density(SpectrumFamily::geometric(0.5), 4).state;
  return kron(g, g);
}

std::vector<Fixture> build_registry() {
  std::vector<Fixture> r;
  r.push_back({"bell", 1, "(|00> + |11>)/sqrt 2", {"hamlinear:w=1", "hamlinear:w=1"},
               [] { return ghz_like(2); }});
  r.push_back({"ghz", 1, "(|000> + |111>)/sqrt 2", {"hamlinear:w=1", "hamlinear:w=1", "hamlinear:w=1"},
               [] { return ghz_like(3); }});
  r.push_back({"w", 1, "(|001> + |010> + |100>)/sqrt 3", {"hamlinear:w=1", "hamlinear:w=1", "hamlinear:w=1"},
               w_state});
  r.push_back({"maximally-mixed", 1, "I/4 on 2x2", {"hamlinear:w=1", "hamlinear:w=1"},
               [] { return DensityOp::maximally_mixed(DimSig({2, 2})); }});
  r.push_back({"geometric-product", 1, "gamma (x) gamma, gamma = geometric(1/2) on 4 levels",
               {"hamlinear:w=1", "hamlinear:w=1"}, geometric_product});
  r.push_back({"gibbs-3x3", 1, "0.9 |psi><psi| + 0.1 gamma (x) gamma, geometric(0.003) marginals on 3 levels",
               {"hamlinear:w=1", "hamlinear:w=1"}, [] { return gibbs_marginal_state(2, 3, 0.003, 0.9); }});
  r.push_back({"gibbs-3party", 1, "0.9 |psi><psi| + 0.1 gamma^(x)3, geometric(0.3) marginals on 7 levels",
               {"hamlinear:w=1", "hamlinear:w=1", "hamlinear:w=1"},
               [] { return gibbs_marginal_state(3, 7, 0.3, 0.9); }});
  std::sort(r.begin(), r.end(), [](const Fixture& a, const Fixture& b) {
    return a.name != b.name ? a.name < b.name : a.version < b.version;
  });
  return r;
}

}  // namespace

Vector schmidt_diagonal(int parties, const std::vector<double>& w) {
  const int d = static_cast<int>(w.size());
  if (parties < 1 || d < 1) throw InvalidArgument("schmidt_diagonal: bad shape");
  int total = 1;
  for (int s = 0; s < parties; ++s) total *= d;
  Vector v = Vector::Zero(total);
  for (int i = 0; i < d; ++i) {
    int idx = 0;
    for (int s = 0; s < parties; ++s) idx = idx * d + i;
    v(idx) = std::sqrt(w[static_cast<std::size_t>(i)]);
  }
  return v;
}

DensityOp gibbs_marginal_state(int parties, int d, double q, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("gibbs_marginal_state: p must lie in [0,1]");
  const std::vector<int> dims(static_cast<std::size_t>(parties), d);
  const DimSig sig(dims);
  const Vector psi = schmidt_diagonal(parties, geometric_weights(d, q));
  const DensityOp gamma = DensityOp::diagonal(DimSig({d}), geometric_weights(d, q));
  Matrix prod = gamma.mat();
  for (int s = 1; s < parties; ++s) prod = kron(prod, gamma.mat());
  return DensityOp::sanitized(sig, p * (psi * psi.adjoint()) + (1.0 - p) * prod);
}

const std::vector<Fixture>& fixture_registry() {
  static const std::vector<Fixture> registry = build_registry();
  return registry;
}

const Fixture& find_fixture(const std::string& ref) {
  const auto at = ref.find('@');
  const std::string name = ref.substr(0, at);
  int version = 0;
  if (at != std::string::npos) {
    try {
      version = std::stoi(ref.substr(at + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("fixture '" + ref + "': bad version");
    }
  }
  const Fixture* found = nullptr;
  for (const auto& f : fixture_registry()) {
    if (f.name != name) continue;
    if (version == 0 || f.version == version) found = &f;
  }
  if (!found) throw InvalidArgument("unknown fixture '" + ref + "'");
  return *found;
}

DensityOp load_fixture(const std::string& ref) { return find_fixture(ref).make(); }

std::vector<std::string> list_fixtures() {
  std::vector<std::string> out;
  for (const auto& f : fixture_registry()) {
    out.push_back(f.name + "@" + std::to_string(f.version) + "  " + f.description);
  }
  return out;
}

}  // namespace qsep
