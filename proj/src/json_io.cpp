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

#include "rhpg/json_io.hpp"

#include <fstream>

namespace rhpg {

Json matrix_to_json(const Matrix& M) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& name) {
    if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty()) throw ConfigError(name + ": expected a non-empty array");
    if (j.front().is_number()) {
        Matrix col(static_cast<Eigen::Index>(j.size()), 1);
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) throw ConfigError(name + ": mixed array entries");
            col(static_cast<Eigen::Index>(i), 0) = j[i].get<double>();
        }
        return col;
    }
    const std::size_t rows = j.size();
    if (!j.front().is_array() || j.front().empty())
        throw ConfigError(name + ": rows must be non-empty arrays");
    const std::size_t cols = j.front().size();
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const Json& row = j[r];
        if (!row.is_array() || row.size() != cols)
            throw ConfigError(name + ": ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number()) throw ConfigError(name + ": non-numeric entry");
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
    }
    return M;
}

Json vector_to_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector vector_from_json(const Json& j, const std::string& name) {
    const Matrix M = matrix_from_json(j, name);
    if (M.cols() == 1) return M.col(0);
    if (M.rows() == 1) return M.row(0).transpose();
    throw ConfigError(name + ": expected a vector");
}

SystemInstance system_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("system: expected a JSON object");
    for (const char* key : {"A", "B", "Q", "R"})
        if (!j.contains(key)) throw ConfigError(std::string("system: missing \"") + key + "\"");

    LinearDynamics dynamics(matrix_from_json(j["A"], "A"), matrix_from_json(j["B"], "B"));
    const int n = dynamics.state_dim();
    const Matrix Q = matrix_from_json(j["Q"], "Q");
    const Matrix QN = j.contains("QN") ? matrix_from_json(j["QN"], "QN") : Q;
    CostWeights weights(Q, matrix_from_json(j["R"], "R"), QN);

    const Matrix sigma0 =
        j.contains("Sigma0") ? matrix_from_json(j["Sigma0"], "Sigma0") : Matrix::Identity(n, n);
    std::string kind = "gaussian";
    Vector x0;
    if (j.contains("initial")) {
        const Json& init = j["initial"];
        kind = init.value("kind", std::string("gaussian"));
        if (kind == "deterministic") {
            if (!init.contains("x0")) throw ConfigError("initial: deterministic kind needs x0");
            x0 = vector_from_json(init["x0"], "x0");
        }
    }
    auto initial = [&]() {
        if (kind == "gaussian") return InitialStateDistribution::gaussian(sigma0);
        if (kind == "scaled_basis") return InitialStateDistribution::scaled_basis(sigma0);
        if (kind == "deterministic") return InitialStateDistribution::deterministic(x0);
        throw ConfigError("initial: unknown kind \"" + kind + "\"");
    }();

    NoiseModel noise;
    if (j.contains("noise")) {
        const Json& nz = j["noise"];
        if (nz.value("enabled", false)) {
            if (!nz.contains("W")) throw ConfigError("noise: enabled without W");
            noise = NoiseModel(matrix_from_json(nz["W"], "W"));
        }
    }

    SystemInstance sys{std::move(dynamics), std::move(weights), std::move(initial),
                       std::move(noise)};
    sys.validate();
    return sys;
}

Json system_to_json(const SystemInstance& sys) {
    Json j;
    j["A"] = matrix_to_json(sys.dynamics.A());
    j["B"] = matrix_to_json(sys.dynamics.B());
    j["Q"] = matrix_to_json(sys.weights.Q());
    j["R"] = matrix_to_json(sys.weights.R());
    j["QN"] = matrix_to_json(sys.weights.QN());
    using Kind = InitialStateDistribution::Kind;
    switch (sys.initial.kind()) {
        case Kind::gaussian:
            j["Sigma0"] = matrix_to_json(sys.initial.second_moment());
            break;
        case Kind::scaled_basis:
            j["Sigma0"] = matrix_to_json(sys.initial.second_moment());
            j["initial"] = {{"kind", "scaled_basis"}};
            break;
        case Kind::deterministic:
            j["initial"] = {{"kind", "deterministic"},
                            {"x0", vector_to_json(sys.initial.fixed_state())}};
            break;
    }
    Json noise = {{"enabled", sys.noise.enabled()}};
    if (sys.noise.enabled()) noise["W"] = matrix_to_json(sys.noise.covariance());
    j["noise"] = std::move(noise);
    return j;
}

Json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

SystemInstance load_system(const std::filesystem::path& path) {
    return system_from_json(load_json(path));
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace rhpg
