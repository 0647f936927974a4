#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "listing/matrix.hpp"

namespace listing {

/// Input exceeds the capacity of an exact (enumerating) method.
class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Input is well-formed but carries no usable signal (e.g. zero variance).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed file or stream content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An item-listing problem: n items placed on n list positions.
///
/// sales(i, j) is the estimated sales of item i at position j, similarity(i, k)
/// the pairwise item similarity and adjacency(j, l) flags neighbouring
/// positions. w weights the diversity penalty against sales.
struct ListingInstance {
  std::size_t n = 0;
  Matrix sales;
  Matrix similarity;
  Matrix adjacency;
  double w = 0.0;
  /// Band used to build adjacency, or 0 when adjacency was supplied directly.
  std::size_t adjacency_band = 0;
};

/// A feasible placement: a permutation stored position-major, so
/// item_at(j) is the item shown at position j.
class Assignment {
 public:
  Assignment() = default;
  /// Throws std::invalid_argument unless item_at is a permutation of 0..n-1.
  explicit Assignment(std::vector<std::size_t> item_at);

  static Assignment identity(std::size_t n);

  std::size_t size() const { return item_at_.size(); }
  std::size_t item_at(std::size_t position) const { return item_at_[position]; }
  std::span<const std::size_t> items() const { return item_at_; }

  /// Item-major view: result[i] is the position of item i.
  std::vector<std::size_t> positions() const;

  bool operator==(const Assignment&) const = default;
  auto operator<=>(const Assignment&) const = default;

 private:
  std::vector<std::size_t> item_at_;
};

struct ObjectiveBreakdown {
  double sales_term = 0.0;
  double diversity_term = 0.0;
  double objective = 0.0;
};

/// One human-readable entry per violated instance invariant; empty when valid.
std::vector<std::string> validate_instance(const ListingInstance& inst);

/// result(j, l) = 1 iff 1 <= |j - l| <= band.
Matrix banded_adjacency(std::size_t n, std::size_t band);

/// Convenience constructor; adjacency is banded_adjacency(n, band), or all
/// zeros when n == 1. Does not validate.
ListingInstance make_instance(Matrix sales, Matrix similarity, std::size_t band, double w);

/// S(x): total sales of the list.
double sales_term(const ListingInstance& inst, const Assignment& a);

/// D(x): minus the similarity summed over ordered pairs of items on adjacent
/// positions. Each adjacent unordered pair therefore contributes twice.
double diversity_term(const ListingInstance& inst, const Assignment& a);

/// S(x) + w * D(x), the quantity maximised by the listing QAP.
ObjectiveBreakdown qap_objective(const ListingInstance& inst, const Assignment& a);

}  // namespace listing
