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

#include "qsep/qmat_json.hpp"

#include <fstream>
#include <sstream>

#include "qsep/error.hpp"

namespace qsep {

Matrix matrix_from_json(const nlohmann::json& re, const nlohmann::json* im) {
  if (!re.is_array() || re.empty()) throw InvalidArgument("\"re\" must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(re.size());
  Matrix m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = re[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      throw InvalidArgument("\"re\" row " + std::to_string(i) + " has wrong length");
    }
    for (Eigen::Index j = 0; j < rows; ++j) m(i, j) = Complex(row[j].get<double>(), 0.0);
  }
  if (im != nullptr) {
    if (!im->is_array() || static_cast<Eigen::Index>(im->size()) != rows) {
      throw InvalidArgument("\"im\" must have the same shape as \"re\"");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto& row = (*im)[i];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
        throw InvalidArgument("\"im\" row " + std::to_string(i) + " has wrong length");
      }
      for (Eigen::Index j = 0; j < rows; ++j) m(i, j).imag(row[j].get<double>());
    }
  }
  return m;
}

nlohmann::json real_part_json(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).real());
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::json imag_part_json(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).imag());
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::json state_to_json(const DensityOp& rho) {
  return {{"dims", rho.sig().dims()}, {"re", real_part_json(rho.mat())}, {"im", imag_part_json(rho.mat())}};
}

DensityOp state_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dims") || !j.contains("re")) {
    throw InvalidArgument("state JSON needs \"dims\" and \"re\"");
  }
  DimSig sig(j.at("dims").get<std::vector<int>>());
  const nlohmann::json* im = j.contains("im") ? &j.at("im") : nullptr;
  Matrix m = matrix_from_json(j.at("re"), im);
  if (m.rows() != sig.total()) {
    std::ostringstream os;
    os << "dims product " << sig.total() << " does not match matrix size " << m.rows();
    throw InvariantViolation(os.str());
  }
  return DensityOp(std::move(sig), std::move(m));
}

DensityOp load_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open state file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
  }
  return state_from_json(j);
}

void save_state(const DensityOp& rho, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write state file " + path.string());
  out << state_to_json(rho).dump() << '\n';
}

}  // namespace qsep
