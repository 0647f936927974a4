#include "listing/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "listing/rng.hpp"

namespace listing {

namespace {

constexpr std::string_view kHeader = "session_id,timestamp,area_id,item_id,position,event";

std::vector<std::string> split_csv_line(std::string_view line, bool& ok) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  ok = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) ok = false;
  fields.push_back(std::move(cur));
  return fields;
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace

bool parse_utc_timestamp(std::string_view s, std::chrono::sys_seconds& out) {
  using namespace std::chrono;
  // YYYY-MM-DDTHH:MM:SS then optional .fraction then Z
  if (s.size() < 20 || s.back() != 'Z') return false;
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't') || s[13] != ':' || s[16] != ':')
    return false;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!parse_uint(s.substr(0, 4), y) || !parse_uint(s.substr(5, 2), mo) ||
      !parse_uint(s.substr(8, 2), d) || !parse_uint(s.substr(11, 2), h) ||
      !parse_uint(s.substr(14, 2), mi) || !parse_uint(s.substr(17, 2), sec))
    return false;
  const std::string_view rest = s.substr(19, s.size() - 20);
  if (!rest.empty()) {
    if (rest.front() != '.' || rest.size() < 2) return false;
    for (char c : rest.substr(1))
      if (c < '0' || c > '9') return false;
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return false;
  out = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
  return true;
}

ParseResult parse_log(std::istream& in) {
  if (!in.good()) throw std::ios_base::failure("parse_log: unreadable stream");
  ParseResult r;
  std::string line;
  bool header_seen = false;
  std::size_t data_lines = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line.empty()) continue;
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      if (line != kHeader) throw FormatError("parse_log: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    ++data_lines;

    bool ok = true;
    auto f = split_csv_line(line, ok);
    LogEvent ev;
    if (ok && f.size() == 6 && !f[0].empty() && !f[2].empty() && !f[3].empty() &&
        parse_utc_timestamp(f[1], ev.timestamp) && parse_uint(f[4], ev.position) &&
        (f[5] == "view" || f[5] == "reserve")) {
      ev.session_id = std::move(f[0]);
      ev.area_id = std::move(f[2]);
      ev.item_id = std::move(f[3]);
      ev.event = f[5] == "view" ? EventKind::view : EventKind::reserve;
      r.events.push_back(std::move(ev));
    } else {
      ++r.malformed;
    }
  }
  if (in.bad()) throw std::ios_base::failure("parse_log: read error");
  if (data_lines > 0 && 2 * r.malformed > data_lines)
    throw FormatError("parse_log: " + std::to_string(r.malformed) + " of " +
                      std::to_string(data_lines) + " lines malformed");
  return r;
}

ItemUniverse::ItemUniverse(std::vector<std::string> ids) : ids_(std::move(ids)) {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (!index_.emplace(ids_[i], i).second)
      throw std::invalid_argument("ItemUniverse: duplicate id '" + ids_[i] + "'");
}

std::size_t ItemUniverse::find(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? ids_.size() : it->second;
}

Matrix estimate_sales(std::span<const LogEvent> events, const ItemUniverse& universe,
                      const EstimationConfig& config) {
  if (config.smoothing_alpha < 0.0 || config.smoothing_beta < 0.0)
    throw std::invalid_argument("estimate_sales: smoothing must be non-negative");
  const std::size_t n = universe.size();
  if (n == 0) throw std::invalid_argument("estimate_sales: empty item universe");

  Matrix views = Matrix::square(n), reserves = Matrix::square(n);
  for (const auto& ev : events) {
    const std::size_t i = universe.find(ev.item_id);
    if (i >= n || ev.position >= n) continue;
    (ev.event == EventKind::view ? views : reserves)(i, ev.position) += 1.0;
  }

  const double alpha = config.smoothing_alpha;
  const double beta = config.smoothing_beta;
  const auto rate = [&](double r, double v) {
    const double den = v + beta;
    return den > 0.0 ? (r + alpha) / den : 0.0;
  };

  std::vector<double> item_v(n, 0.0), item_r(n, 0.0), pos_v(n, 0.0), pos_r(n, 0.0);
  double all_v = 0.0, all_r = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      item_v[i] += views(i, j);
      item_r[i] += reserves(i, j);
      pos_v[j] += views(i, j);
      pos_r[j] += reserves(i, j);
      all_v += views(i, j);
      all_r += reserves(i, j);
    }
  const double global = rate(all_r, all_v);

  Matrix s = Matrix::square(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (views(i, j) > 0.0)
        s(i, j) = rate(reserves(i, j), views(i, j));
      else
        s(i, j) = global > 0.0 ? rate(item_r[i], item_v[i]) * rate(pos_r[j], pos_v[j]) / global : 0.0;
    }
  return s;
}

Matrix cobrowse_similarity(std::span<const LogEvent> events, const ItemUniverse& universe) {
  const std::size_t n = universe.size();
  std::map<std::string, std::set<std::size_t>> sessions;
  for (const auto& ev : events) {
    if (ev.event != EventKind::view) continue;
    const std::size_t i = universe.find(ev.item_id);
    if (i < n) sessions[ev.session_id].insert(i);
  }
  Matrix f = Matrix::square(n);
  for (const auto& [sid, items] : sessions)
    for (auto a = items.begin(); a != items.end(); ++a)
      for (auto b = std::next(a); b != items.end(); ++b) {
        f(*a, *b) += 1.0;
        f(*b, *a) += 1.0;
      }
  return f;
}

Matrix znormalize(const Matrix& m, bool exclude_diagonal) {
  const auto included = [&](std::size_t r, std::size_t c) { return !(exclude_diagonal && r == c); };
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (included(r, c)) {
        sum += m(r, c);
        ++count;
      }
  if (count == 0) throw DegenerateInputError("znormalize: no cells to normalise");
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (included(r, c)) ss += (m(r, c) - mean) * (m(r, c) - mean);
  const double sd = std::sqrt(ss / static_cast<double>(count));
  if (!(sd > 1e-12 * (1.0 + std::abs(mean))))
    throw DegenerateInputError("znormalize: zero variance");

  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = included(r, c) ? (m(r, c) - mean) / sd : 0.0;
  return out;
}

ProfileKind parse_profile(const std::string& s) {
  if (s == "clustered") return ProfileKind::clustered;
  if (s == "uniform") return ProfileKind::uniform;
  throw std::invalid_argument("unknown profile '" + s + "'");
}

std::string to_string(ProfileKind k) { return k == ProfileKind::clustered ? "clustered" : "uniform"; }

SyntheticInstance generate_synthetic_labeled(std::size_t n, std::uint64_t seed,
                                             const SyntheticProfile& profile) {
  if (n < 2) throw std::invalid_argument("generate_synthetic: n must be at least 2");
  Xoshiro256 rng(derive_seed(seed, 0x5EED));
  const auto normal = [&] {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };

  SyntheticInstance out;
  out.cluster.assign(n, 0);
  if (profile.kind == ProfileKind::clustered) {
    const std::size_t k = std::clamp<std::size_t>(profile.clusters, 1, n);
    for (std::size_t i = 0; i < n; ++i) out.cluster[i] = i % k;
    for (std::size_t i = n; i > 1; --i) std::swap(out.cluster[i - 1], out.cluster[rng.below(i)]);
  }

  Matrix sales = Matrix::square(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double quality = std::exp(0.5 * normal());
    for (std::size_t j = 0; j < n; ++j) {
      const double attractiveness = 1.0 / std::pow(1.0 + static_cast<double>(j), 0.8);
      sales(i, j) = std::max(1e-6, quality * attractiveness * (1.0 + 0.1 * normal()));
    }
  }

  Matrix cobrowse = Matrix::square(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      double c = 0.0;
      if (profile.kind == ProfileKind::clustered)
        c = out.cluster[i] == out.cluster[k] ? 30.0 + static_cast<double>(rng.below(20))
                                             : static_cast<double>(rng.below(8));
      else
        c = static_cast<double>(rng.below(20));
      cobrowse(i, k) = cobrowse(k, i) = c;
    }

  ListingInstance& inst = out.instance;
  inst.n = n;
  inst.w = profile.w;
  inst.adjacency_band = std::min(profile.band, n - 1);
  inst.adjacency = banded_adjacency(n, inst.adjacency_band);
  inst.sales = znormalize(sales, false);
  try {
    inst.similarity = znormalize(cobrowse, true);
  } catch (const DegenerateInputError&) {
    // Only one distinct off-diagonal count (always the case for n = 2):
    // centring leaves nothing.
    inst.similarity = Matrix::square(n);
  }
  return out;
}

ListingInstance generate_synthetic(std::size_t n, std::uint64_t seed, const SyntheticProfile& profile) {
  return generate_synthetic_labeled(n, seed, profile).instance;
}

IngestSummary build_instance_from_log(std::span<const LogEvent> events, const IngestOptions& opt) {
  if (opt.n < 2) throw std::invalid_argument("ingest: n must be at least 2");
  std::vector<LogEvent> area;
  for (const auto& ev : events)
    if (ev.area_id == opt.area) area.push_back(ev);

  std::map<std::string, std::size_t> views;
  std::map<std::string, std::set<std::string>> sessions;
  for (const auto& ev : area) {
    sessions[ev.item_id].insert(ev.session_id);
    if (ev.event == EventKind::view) ++views[ev.item_id];
  }
  std::vector<std::pair<std::size_t, std::string>> ranked;
  for (const auto& [id, s] : sessions)
    if (s.size() >= opt.estimation.min_sessions) ranked.emplace_back(views[id], id);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (ranked.size() < 2)
    throw DegenerateInputError("ingest: fewer than two eligible items in area '" + opt.area + "'");
  if (ranked.size() > opt.n) ranked.resize(opt.n);

  std::vector<std::string> ids;
  for (const auto& r : ranked) ids.push_back(r.second);
  IngestSummary out;
  out.universe = ItemUniverse(std::move(ids));
  out.area_events = area.size();

  const std::size_t n = out.universe.size();
  ListingInstance& inst = out.instance;
  inst.n = n;
  inst.w = opt.w;
  inst.adjacency_band = std::min(opt.band, n - 1);
  inst.adjacency = banded_adjacency(n, inst.adjacency_band);
  inst.sales = znormalize(estimate_sales(area, out.universe, opt.estimation), false);
  // Two items leave a single pair, which cannot be normalised; as in the
  // generator the diversity term then vanishes.
  inst.similarity = n == 2 ? Matrix::square(2) : znormalize(cobrowse_similarity(area, out.universe), true);
  return out;
}

}  // namespace listing
