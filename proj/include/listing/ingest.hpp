#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "listing/model.hpp"

namespace listing {

enum class EventKind { view, reserve };

/// One row of the access log.
struct LogEvent {
  std::string session_id;
  std::chrono::sys_seconds timestamp;
  std::string area_id;
  std::string item_id;
  std::size_t position = 0;  ///< 0-based slot at view time
  EventKind event = EventKind::view;
};

struct ParseResult {
  std::vector<LogEvent> events;
  std::size_t malformed = 0;
};

/// Parses the log CSV (header: session_id,timestamp,area_id,item_id,position,event).
/// Malformed data lines are counted and skipped. Throws FormatError on a bad
/// header or when more than half of the data lines are malformed, and
/// std::ios_base::failure when the stream cannot be read.
ParseResult parse_log(std::istream& in);

/// Parses "YYYY-MM-DDTHH:MM:SS[.fff]Z". Returns false on anything else.
bool parse_utc_timestamp(std::string_view s, std::chrono::sys_seconds& out);

/// Maps external item ids onto 0..n-1.
class ItemUniverse {
 public:
  ItemUniverse() = default;
  /// Throws std::invalid_argument on duplicate ids.
  explicit ItemUniverse(std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  const std::string& id(std::size_t index) const { return ids_[index]; }
  const std::vector<std::string>& ids() const { return ids_; }
  /// Index of id, or size() when absent.
  std::size_t find(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct EstimationConfig {
  double smoothing_alpha = 1.0;
  double smoothing_beta = 20.0;
  /// Items seen in fewer sessions are not eligible for an ingested list.
  std::size_t min_sessions = 10;
};

/// Smoothed conversion-rate sales estimate.
///
/// Observed cell: (reserves + alpha) / (views + beta). Cells never viewed
/// fall back to the position-bias factorisation
///   item_rate(i) * position_rate(j) / global_rate,
/// each rate smoothed the same way. Events for items outside the universe
/// or at positions >= n are ignored.
Matrix estimate_sales(std::span<const LogEvent> events, const ItemUniverse& universe,
                      const EstimationConfig& config);

/// f(i, k) = number of distinct sessions that viewed both i and k.
Matrix cobrowse_similarity(std::span<const LogEvent> events, const ItemUniverse& universe);

/// Shifts and scales the included cells to mean 0 and population standard
/// deviation 1. With exclude_diagonal the diagonal is ignored for the
/// statistics and set to 0. Throws DegenerateInputError on zero variance.
Matrix znormalize(const Matrix& m, bool exclude_diagonal);

enum class ProfileKind { clustered, uniform };

ProfileKind parse_profile(const std::string& s);
std::string to_string(ProfileKind k);

struct SyntheticProfile {
  ProfileKind kind = ProfileKind::clustered;
  std::size_t clusters = 2;
  double w = 0.5;
  std::size_t band = 1;
};

struct SyntheticInstance {
  ListingInstance instance;
  /// Planted cluster of each item (all 0 for the uniform profile).
  std::vector<std::size_t> cluster;
};

/// Synthetic stand-in for a real access log. Sales follow a decaying
/// position-attractiveness curve times a per-item quality factor with
/// noise; similarity is a simulated co-browse count that is high inside
/// planted clusters. Both are z-normalised (similarity with a zero
/// diagonal). Deterministic per seed; throws std::invalid_argument if n < 2.
SyntheticInstance generate_synthetic_labeled(std::size_t n, std::uint64_t seed,
                                             const SyntheticProfile& profile = {});
ListingInstance generate_synthetic(std::size_t n, std::uint64_t seed,
                                   const SyntheticProfile& profile = {});

struct IngestOptions {
  std::string area;
  std::size_t n = 8;
  double w = 0.5;
  std::size_t band = 1;
  EstimationConfig estimation;
};

struct IngestSummary {
  ListingInstance instance;
  ItemUniverse universe;  ///< instance index -> item id
  std::size_t area_events = 0;
};

/// Builds an instance from the `n` most viewed eligible items of one area
/// (ties by item id). With exactly two items the similarity is all zero.
/// Throws DegenerateInputError when fewer than two items qualify or a matrix
/// cannot be normalised.
IngestSummary build_instance_from_log(std::span<const LogEvent> events, const IngestOptions& opt);

}  // namespace listing
