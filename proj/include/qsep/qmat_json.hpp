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

// JSON matrix format: {"dims":[d1,...,dn],"re":[[...]],"im":[[...]]},
// row-major. "im" may be omitted for real matrices.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "qsep/qmat.hpp"

namespace qsep {

nlohmann::json state_to_json(const DensityOp& rho);
/// Validates shape, Hermiticity, positivity and trace.
DensityOp state_from_json(const nlohmann::json& j);

Matrix matrix_from_json(const nlohmann::json& re, const nlohmann::json* im);
nlohmann::json real_part_json(const Matrix& m);
nlohmann::json imag_part_json(const Matrix& m);

DensityOp load_state(const std::filesystem::path& path);
void save_state(const DensityOp& rho, const std::filesystem::path& path);

}  // namespace qsep
