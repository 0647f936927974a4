#include "listing/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "listing/io.hpp"

namespace listing {

Matrix build_core_matrix(const ListingInstance& inst) {
  const std::size_t n = inst.n;
  Matrix q = Matrix::square(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(var_index(i, j, n), var_index(i, j, n)) = -inst.sales(i, j);

  if (inst.w == 0.0) return q;
  // The ordered quadruple sum already enumerates (a, b) and (b, a), so each
  // ordered term lands in exactly one symmetric cell.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k || inst.similarity(i, k) == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l) {
          const double d = inst.adjacency(j, l);
          if (d == 0.0) continue;
          q(var_index(i, j, n), var_index(k, l, n)) += inst.w * inst.similarity(i, k) * d;
        }
    }
  return q;
}

double default_m(const Matrix& core) {
  double best = 0.0;
  for (std::size_t a = 0; a < core.rows(); ++a) {
    best = std::max(best, std::abs(core(a, a)));
    for (std::size_t b = a + 1; b < core.cols(); ++b)
      best = std::max(best, std::abs(core(a, b) + core(b, a)));
  }
  return best == 0.0 ? 1.0 : best;
}

QuboProblem build_qubo(const ListingInstance& inst, std::optional<double> m) {
  if (m && (*m < 0.0 || !std::isfinite(*m)))
    throw std::invalid_argument("build_qubo: penalty weight must be a non-negative real");
  if (const auto errs = validate_instance(inst); !errs.empty())
    throw std::invalid_argument("build_qubo: invalid instance: " + errs.front());

  const std::size_t n = inst.n;
  QuboProblem p;
  p.n = n;
  p.q = build_core_matrix(inst);
  p.m = m ? *m : default_m(p.q);

  // M * sum_i (sum_j x_ij - 1)^2 expands to M * (-sum_j x_ij
  // + sum_{j != l} x_ij x_il + 1); likewise per column.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = var_index(i, j, n);
      p.q(a, a) -= 2.0 * p.m;
      for (std::size_t l = 0; l < n; ++l) {
        if (l != j) p.q(a, var_index(i, l, n)) += p.m;
        if (l != i) p.q(a, var_index(l, j, n)) += p.m;
      }
    }
  p.offset = 2.0 * static_cast<double>(n) * p.m;
  return p;
}

double energy(const Matrix& q, std::span<const std::uint8_t> x) {
  if (x.size() != q.rows()) throw std::invalid_argument("energy: vector length mismatch");
  double e = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (!x[a]) continue;
    const auto row = q.row(a);
    for (std::size_t b = 0; b < x.size(); ++b)
      if (x[b]) e += row[b];
  }
  return e;
}

double energy(const QuboProblem& p, std::span<const std::uint8_t> x) { return energy(p.q, x); }

DecodeResult decode(std::span<const std::uint8_t> x, std::size_t n) {
  if (x.size() != n * n) throw std::invalid_argument("decode: vector length is not n^2");
  DecodeResult r;
  std::vector<std::size_t> col_count(n, 0);
  std::vector<std::size_t> item_at(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t row_count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!x[var_index(i, j, n)]) continue;
      ++row_count;
      ++col_count[j];
      item_at[j] = i;
    }
    if (row_count != 1) ++r.row_violations;
  }
  for (std::size_t c : col_count)
    if (c != 1) ++r.col_violations;
  if (r.row_violations == 0 && r.col_violations == 0) r.assignment = Assignment(std::move(item_at));
  return r;
}

BitVector encode(const Assignment& a) {
  const std::size_t n = a.size();
  BitVector x(n * n, 0);
  for (std::size_t j = 0; j < n; ++j) x[var_index(a.item_at(j), j, n)] = 1;
  return x;
}

BitVector repair(std::span<const std::uint8_t> x, const QuboProblem& p,
                 const ListingInstance& inst) {
  const std::size_t n = inst.n;
  if (x.size() != p.num_vars() || x.size() != n * n)
    throw std::invalid_argument("repair: vector length mismatch");

  std::vector<std::size_t> row_count(n, 0), col_count(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (x[var_index(i, j, n)]) {
        ++row_count[i];
        ++col_count[j];
      }

  BitVector out(n * n, 0);
  std::vector<bool> item_done(n, false), pos_done(n, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (x[var_index(i, j, n)] && row_count[i] == 1 && col_count[j] == 1) {
        out[var_index(i, j, n)] = 1;
        item_done[i] = true;
        pos_done[j] = true;
      }

  std::vector<std::tuple<double, std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i) {
    if (item_done[i]) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (!pos_done[j]) cells.emplace_back(inst.sales(i, j), i, j);
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  for (const auto& [s, i, j] : cells) {
    if (item_done[i] || pos_done[j]) continue;
    out[var_index(i, j, n)] = 1;
    item_done[i] = true;
    pos_done[j] = true;
  }
  return out;
}

std::string export_qubo(const QuboProblem& p) {
  std::ostringstream os;
  os << p.num_vars() << ' ' << format_double(p.offset) << ' ' << format_double(p.m) << '\n';
  for (std::size_t a = 0; a < p.num_vars(); ++a)
    for (std::size_t b = a; b < p.num_vars(); ++b) {
      const double v = a == b ? p.q(a, a) : p.q(a, b) + p.q(b, a);
      if (v != 0.0) os << a << ' ' << b << ' ' << format_double(v) << '\n';
    }
  return os.str();
}

QuboProblem import_qubo(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::size_t num_vars = 0;
  std::string offset_s, m_s;
  if (!(is >> num_vars >> offset_s >> m_s)) throw FormatError("qubo: bad header");
  QuboProblem p;
  p.q = Matrix::square(num_vars);
  p.offset = parse_double(offset_s);
  p.m = parse_double(m_s);
  const auto root = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(num_vars))));
  p.n = root * root == num_vars ? root : 0;

  std::size_t a = 0, b = 0;
  std::string value_s;
  while (is >> a >> b >> value_s) {
    if (a > b || b >= num_vars) throw FormatError("qubo: entry outside upper triangle");
    const double v = parse_double(value_s);
    if (a == b) {
      p.q(a, a) = v;
    } else {
      p.q(a, b) = v / 2.0;
      p.q(b, a) = v / 2.0;
    }
  }
  if (!is.eof()) throw FormatError("qubo: malformed entry line");
  return p;
}

}  // namespace listing
