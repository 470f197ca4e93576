/*
 Copyright 2026 The RHPG Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef RHPG_JSON_IO_HPP
#define RHPG_JSON_IO_HPP

#include <filesystem>
#include <string>

#include "json.hpp"
#include "rhpg/system_model.hpp"

namespace rhpg {

using Json = nlohmann::json;

// Matrices are row-major nested arrays. A bare number reads as 1x1 and a
// flat array as a column vector.
Json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const Json& j, const std::string& name);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& name);

/// {"A", "B", "Q", "R", "QN", "Sigma0", "noise": {"enabled", "W"}}.
/// QN defaults to Q, Sigma0 to the identity and noise to disabled. An
/// optional "initial": {"kind": "gaussian"|"deterministic"|"scaled_basis",
/// "x0": [...]} selects the initial-state law.
SystemInstance system_from_json(const Json& j);
Json system_to_json(const SystemInstance& sys);

SystemInstance load_system(const std::filesystem::path& path);
Json load_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace rhpg

#endif  // RHPG_JSON_IO_HPP
