#pragma once

// JSON encodings for factorizations, dense matrices, permanents and run
// statistics. Complex numbers are [re, im] pairs; doubles are written in the
// shortest form that parses back to the same value.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "mpsperm/engine.hpp"
#include "mpsperm/factorization.hpp"
#include "mpsperm/scaled_complex.hpp"
#include "mpsperm/types.hpp"

namespace mpsperm::io {

using nlohmann::json;

json to_json(const Complexd& z);
Complexd complex_from_json(const json& j, const std::string& where);

json to_json(const BlockFactorizationd& f);
/// Structural parse only; call validate_factorization for tiling checks.
BlockFactorizationd factorization_from_json(const json& j);

json to_json(const Matrixd& m);
Matrixd matrix_from_json(const json& j);

json to_json(const ScaledComplex<double>& z);
ScaledComplex<double> scaled_from_json(const json& j);

json to_json(const RunStats& stats);
RunStats stats_from_json(const json& j);

json to_json(const std::vector<std::size_t>& permutation);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace mpsperm::io
