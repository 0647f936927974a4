#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "listing/model.hpp"

namespace listing {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Strict full-string parse; throws FormatError on trailing junk.
double parse_double(std::string_view s);

/// Instance JSON: {"n", "sales", "similarity", "adjacency_band", "w"}.
/// adjacency_band 0 means no adjacent positions.
nlohmann::json instance_to_json(const ListingInstance& inst);
ListingInstance instance_from_json(const nlohmann::json& j);

/// Throws FormatError for unreadable, malformed or invalid instance files.
ListingInstance read_instance(const std::filesystem::path& path);
void write_instance(const std::filesystem::path& path, const ListingInstance& inst);
std::string dump_instance(const ListingInstance& inst);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view s);
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace listing
