#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mflqg/model.hpp"

namespace mflqg {

using Json = nlohmann::ordered_json;

// Matrices are row-major nested arrays. A bare number is accepted as a 1x1
// matrix.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& what);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& what);

// Model document layout:
//
//   {
//     "horizon": 90, "n_agents": 30,
//     "dims": {"d_x": 1, "d_u": 1, "d_y": 1},
//     "dynamics": {"A": M | [M...], "B": ..., "D": ...},
//     "cost": {"Q": ..., "R": ..., "P": ..., "S": ... (optional cross term)},
//     "observation": {"Cx": ..., "Cz": ...},
//     "noise": {"Sigma_X": M, "Sigma_W": M, "Sigma_V": M},
//     "initial_mean": [..],
//     "observation_mode": "full" | "noisy"
//   }
//
// Each per-step entry is either one matrix (held constant) or an array of
// `horizon` matrices. When "S" is present the cross term is folded into P.
// The returned model has not been validated.
LqMeanFieldModel model_from_json(const Json& doc);

// Writes constant sequences as a single matrix.
Json model_to_json(const LqMeanFieldModel& model);

// Parse errors carry line and column of the offending byte.
LqMeanFieldModel load_model(const std::filesystem::path& path);
void save_model(const LqMeanFieldModel& model,
                const std::filesystem::path& path);

Json parse_json_text(const std::string& text, const std::string& source);

}  // namespace mflqg
