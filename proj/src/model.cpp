#include "listing/model.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace listing {

Assignment::Assignment(std::vector<std::size_t> item_at) : item_at_(std::move(item_at)) {
  std::vector<bool> seen(item_at_.size(), false);
  for (std::size_t item : item_at_) {
    if (item >= item_at_.size() || seen[item])
      throw std::invalid_argument("assignment is not a permutation");
    seen[item] = true;
  }
}

Assignment Assignment::identity(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return Assignment(std::move(v));
}

std::vector<std::size_t> Assignment::positions() const {
  std::vector<std::size_t> pos(item_at_.size());
  for (std::size_t j = 0; j < item_at_.size(); ++j) pos[item_at_[j]] = j;
  return pos;
}

namespace {

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void check_symmetric_zero_diagonal(const Matrix& m, const char* name,
                                   std::vector<std::string>& out) {
  bool asym = false;
  bool diag = false;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 0.0) diag = true;
    for (std::size_t k = i + 1; k < m.cols(); ++k)
      if (m(i, k) != m(k, i)) asym = true;
  }
  if (asym) out.push_back(std::string(name) + " is not symmetric");
  if (diag) out.push_back(std::string(name) + " has a non-zero diagonal");
}

void require_compatible(const ListingInstance& inst, const Assignment& a) {
  if (a.size() != inst.n || inst.sales.rows() != inst.n || inst.sales.cols() != inst.n)
    throw std::invalid_argument("assignment size does not match instance");
}

}  // namespace

std::vector<std::string> validate_instance(const ListingInstance& inst) {
  std::vector<std::string> out;
  const std::size_t n = inst.n;
  if (n == 0) out.emplace_back("n must be positive");

  const struct {
    const Matrix& m;
    const char* name;
  } mats[] = {{inst.sales, "sales"}, {inst.similarity, "similarity"}, {inst.adjacency, "adjacency"}};
  bool shapes_ok = true;
  for (const auto& [m, name] : mats) {
    if (m.rows() != n || m.cols() != n) {
      out.push_back(std::string(name) + " is " + shape(m) + ", expected " + std::to_string(n) +
                    "x" + std::to_string(n));
      shapes_ok = false;
    }
  }
  if (!shapes_ok) return out;

  for (const auto& [m, name] : mats) {
    for (double v : m.values()) {
      if (!std::isfinite(v)) {
        out.push_back(std::string(name) + " has non-finite entries");
        break;
      }
    }
  }
  check_symmetric_zero_diagonal(inst.similarity, "similarity", out);
  check_symmetric_zero_diagonal(inst.adjacency, "adjacency", out);
  for (double v : inst.adjacency.values()) {
    if (v != 0.0 && v != 1.0) {
      out.emplace_back("adjacency has non-binary entries");
      break;
    }
  }
  if (!(inst.w >= 0.0) || !std::isfinite(inst.w)) out.emplace_back("w must be a non-negative real");
  return out;
}

Matrix banded_adjacency(std::size_t n, std::size_t band) {
  if (n == 0) throw std::invalid_argument("banded_adjacency: n must be positive");
  if (band == 0 || band >= n) throw std::invalid_argument("banded_adjacency: need 0 < band < n");
  Matrix d = Matrix::square(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l) {
      const std::size_t gap = j > l ? j - l : l - j;
      if (gap >= 1 && gap <= band) d(j, l) = 1.0;
    }
  return d;
}

ListingInstance make_instance(Matrix sales, Matrix similarity, std::size_t band, double w) {
  ListingInstance inst;
  inst.n = sales.rows();
  inst.adjacency = inst.n > 1 ? banded_adjacency(inst.n, band) : Matrix::square(inst.n);
  inst.adjacency_band = inst.n > 1 ? band : 0;
  inst.sales = std::move(sales);
  inst.similarity = std::move(similarity);
  inst.w = w;
  return inst;
}

double sales_term(const ListingInstance& inst, const Assignment& a) {
  require_compatible(inst, a);
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += inst.sales(a.item_at(j), j);
  return s;
}

double diversity_term(const ListingInstance& inst, const Assignment& a) {
  require_compatible(inst, a);
  if (inst.similarity.rows() != inst.n || inst.adjacency.rows() != inst.n)
    throw std::invalid_argument("similarity/adjacency size does not match instance");
  double sum = 0.0;
  for (std::size_t j = 0; j < inst.n; ++j) {
    const std::size_t item = a.item_at(j);
    for (std::size_t l = 0; l < inst.n; ++l)
      if (inst.adjacency(j, l) != 0.0)
        sum += inst.adjacency(j, l) * inst.similarity(item, a.item_at(l));
  }
  return -sum;
}

ObjectiveBreakdown qap_objective(const ListingInstance& inst, const Assignment& a) {
  ObjectiveBreakdown b;
  b.sales_term = sales_term(inst, a);
  b.diversity_term = diversity_term(inst, a);
  b.objective = b.sales_term + inst.w * b.diversity_term;
  return b;
}

}  // namespace listing
