#pragma once

#include <filesystem>

#include <json.hpp>

#include "qml/spectral.hpp"

namespace qml {

using Json = nlohmann::json;

// Binary container: magic, site list, dims, then row-major complex doubles.
void save_operator(const DenseOperator& op, const std::filesystem::path& file);
DenseOperator load_operator(const std::filesystem::path& file);

// JSON form for small fixtures: {"sites": [...], "dims": [...],
//  "re": [[..]], "im": [[..]]}.
Json operator_to_json(const DenseOperator& op);
DenseOperator operator_from_json(const Json& j);

// Hamiltonian term list: [{"sites": [...], "re": [[..]], "im": [[..]]}, ...]
std::vector<LocalTerm> terms_from_json(const Json& j);

}  // namespace qml
