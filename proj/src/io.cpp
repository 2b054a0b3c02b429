#include "mpsperm/io.hpp"

#include <fstream>
#include <sstream>

namespace mpsperm::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Parse, where + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing \"") + key + "\"");
  return *it;
}

std::size_t size_member(const json& j, const char* key, const std::string& where) {
  const auto& v = member(j, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    fail(where, std::string("\"") + key + "\" must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

json to_json(const Complexd& z) { return json::array({z.real(), z.imag()}); }

Complexd complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(where, "complex entries are [re, im] number pairs");
  Complexd z(j[0].get<double>(), j[1].get<double>());
  if (!is_finite(z)) throw Error(ErrorCode::NonFiniteEntry, where + ": non-finite entry");
  return z;
}

json to_json(const BlockFactorizationd& f) {
  json factors = json::array();
  for (const auto& factor : f.factors) {
    json blocks = json::array();
    for (const auto& b : factor.blocks) {
      json entries = json::array();
      for (Eigen::Index r = 0; r < b.entries.rows(); ++r)
        for (Eigen::Index c = 0; c < b.entries.cols(); ++c) entries.push_back(to_json(b.entries(r, c)));
      blocks.push_back({{"start", b.start}, {"size", b.size()}, {"entries", std::move(entries)}});
    }
    factors.push_back(std::move(blocks));
  }
  return {{"dim", f.dim}, {"factors", std::move(factors)}};
}

BlockFactorizationd factorization_from_json(const json& j) {
  BlockFactorizationd f;
  f.dim = size_member(j, "dim", "factorization");
  const auto& factors = member(j, "factors", "factorization");
  if (!factors.is_array()) fail("factorization", "\"factors\" must be an array");
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const std::string factor_where = "factor " + std::to_string(i);
    if (!factors[i].is_array()) fail(factor_where, "expected an array of blocks");
    BlockDiagonalFactord factor{f.dim, {}};
    for (std::size_t k = 0; k < factors[i].size(); ++k) {
      const std::string where = factor_where + ", block " + std::to_string(k);
      const auto& jb = factors[i][k];
      const std::size_t start = size_member(jb, "start", where);
      const std::size_t size = size_member(jb, "size", where);
      if (size == 0) fail(where, "size must be 1 or 2");
      if (size > 2) throw Error(ErrorCode::OversizeBlock, where + ": block size " + std::to_string(size));
      const auto& entries = member(jb, "entries", where);
      if (!entries.is_array() || entries.size() != size * size)
        throw Error(ErrorCode::SizeMismatch, where + ": expected " + std::to_string(size * size) + " entries");
      Blockd b{start, BlockMatrix<double>(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size))};
      for (std::size_t e = 0; e < entries.size(); ++e)
        b.entries(static_cast<Eigen::Index>(e / size), static_cast<Eigen::Index>(e % size)) =
            complex_from_json(entries[e], where + ", entry " + std::to_string(e));
      factor.blocks.push_back(std::move(b));
    }
    f.factors.push_back(std::move(factor));
  }
  return f;
}

json to_json(const Matrixd& m) {
  json entries = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back(to_json(m(r, c)));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

Matrixd matrix_from_json(const json& j) {
  const std::size_t rows = size_member(j, "rows", "matrix");
  const std::size_t cols = size_member(j, "cols", "matrix");
  if (rows == 0 || cols == 0) fail("matrix", "rows and cols must be positive");
  const auto& entries = member(j, "entries", "matrix");
  if (!entries.is_array() || entries.size() != rows * cols)
    throw Error(ErrorCode::SizeMismatch, "matrix: expected " + std::to_string(rows * cols) + " entries");
  Matrixd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t e = 0; e < entries.size(); ++e)
    m(static_cast<Eigen::Index>(e / cols), static_cast<Eigen::Index>(e % cols)) =
        complex_from_json(entries[e], "matrix entry " + std::to_string(e));
  return m;
}

json to_json(const ScaledComplex<double>& z) {
  return {{"mantissa", to_json(z.mantissa())}, {"exponent10", z.exponent10()}};
}

ScaledComplex<double> scaled_from_json(const json& j) {
  const auto mantissa = complex_from_json(member(j, "mantissa", "permanent"), "permanent mantissa");
  const auto& e = member(j, "exponent10", "permanent");
  if (!e.is_number_integer()) fail("permanent", "\"exponent10\" must be an integer");
  return ScaledComplex<double>(mantissa, e.get<std::int64_t>());
}

json to_json(const RunStats& stats) {
  return {{"max_bond", stats.max_bond},
          {"per_layer_bonds", stats.per_layer_bonds},
          {"per_layer_phys", stats.per_layer_phys},
          {"wall_time", stats.wall_time},
          {"svd_count", stats.svd_count},
          {"truncated_rank_total", stats.truncated_rank_total}};
}

RunStats stats_from_json(const json& j) {
  RunStats s;
  try {
    s.max_bond = j.at("max_bond").get<std::size_t>();
    s.per_layer_bonds = j.at("per_layer_bonds").get<std::vector<std::size_t>>();
    s.per_layer_phys = j.at("per_layer_phys").get<std::vector<std::size_t>>();
    s.wall_time = j.at("wall_time").get<double>();
    s.svd_count = j.at("svd_count").get<std::size_t>();
    s.truncated_rank_total = j.at("truncated_rank_total").get<std::size_t>();
  } catch (const json::exception& e) {
    fail("stats", e.what());
  }
  return s;
}

json to_json(const std::vector<std::size_t>& permutation) { return json(permutation); }

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(path.string(), e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(path.string(), "cannot open file for writing");
  out << j.dump(2) << "\n";
  if (!out) fail(path.string(), "write failed");
}

}  // namespace mpsperm::io
