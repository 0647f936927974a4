#include "listing/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace listing {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw FormatError("not a number: '" + std::string(s) + "'");
  return v;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (double v : m.row(r)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, std::size_t n, const char* name) {
  if (!j.is_array() || j.size() != n)
    throw FormatError(std::string(name) + ": expected " + std::to_string(n) + " rows");
  Matrix m = Matrix::square(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != n)
      throw FormatError(std::string(name) + ": row " + std::to_string(r) + " has wrong length");
    for (std::size_t c = 0; c < n; ++c) {
      if (!row[c].is_number()) throw FormatError(std::string(name) + ": non-numeric entry");
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

}  // namespace

nlohmann::json instance_to_json(const ListingInstance& inst) {
  nlohmann::json j;
  j["n"] = inst.n;
  j["sales"] = matrix_to_json(inst.sales);
  j["similarity"] = matrix_to_json(inst.similarity);
  j["adjacency_band"] = inst.adjacency_band;
  j["w"] = inst.w;
  return j;
}

ListingInstance instance_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::int64_t>();
    if (n <= 0) throw FormatError("n must be positive");
    const auto band = j.at("adjacency_band").get<std::int64_t>();
    if (band < 0 || (band > 0 && band >= n)) throw FormatError("adjacency_band must be in [0, n)");
    ListingInstance inst;
    inst.n = static_cast<std::size_t>(n);
    inst.sales = matrix_from_json(j.at("sales"), inst.n, "sales");
    inst.similarity = matrix_from_json(j.at("similarity"), inst.n, "similarity");
    inst.adjacency_band = static_cast<std::size_t>(band);
    inst.adjacency = band == 0 ? Matrix::square(inst.n) : banded_adjacency(inst.n, inst.adjacency_band);
    inst.w = j.at("w").get<double>();
    if (const auto errs = validate_instance(inst); !errs.empty())
      throw FormatError("invalid instance: " + errs.front());
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("instance json: ") + e.what());
  }
}

ListingInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return instance_from_json(j);
}

std::string dump_instance(const ListingInstance& inst) { return instance_to_json(inst).dump(2) + "\n"; }

void write_instance(const std::filesystem::path& path, const ListingInstance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << dump_instance(inst);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

}  // namespace listing
