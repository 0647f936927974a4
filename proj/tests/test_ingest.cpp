#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "listing/ingest.hpp"
#include "test_support.hpp"

namespace listing {
namespace {

constexpr const char* kHeader = "session_id,timestamp,area_id,item_id,position,event\n";

LogEvent view(std::string session, std::string item, std::size_t pos) {
  return {std::move(session), {}, "a", std::move(item), pos, EventKind::view};
}

LogEvent reserve(std::string session, std::string item, std::size_t pos) {
  return {std::move(session), {}, "a", std::move(item), pos, EventKind::reserve};
}

ParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_log(in);
}

std::vector<LogEvent> toy_log() {
  std::ifstream in(std::string(LISTING_FIXTURE_DIR) + "/toy_log.csv");
  return parse_log(in).events;
}

std::pair<double, double> mean_sd(const Matrix& m, bool exclude_diagonal) {
  double sum = 0.0, count = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (!exclude_diagonal || r != c) {
        sum += m(r, c);
        count += 1.0;
      }
  const double mean = sum / count;
  double ss = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (!exclude_diagonal || r != c) ss += (m(r, c) - mean) * (m(r, c) - mean);
  return {mean, std::sqrt(ss / count)};
}

TEST(ParseLog, Examples) {
  ParseResult r = parse("");
  EXPECT_TRUE(r.events.empty());
  EXPECT_EQ(r.malformed, 0u);

  r = parse(std::string(kHeader) + "s1,2024-01-02T03:04:05Z,tokyo,h7,3,reserve\n");
  ASSERT_EQ(r.events.size(), 1u);
  const LogEvent& e = r.events[0];
  EXPECT_EQ(e.session_id, "s1");
  EXPECT_EQ(e.area_id, "tokyo");
  EXPECT_EQ(e.item_id, "h7");
  EXPECT_EQ(e.position, 3u);
  EXPECT_EQ(e.event, EventKind::reserve);
  using namespace std::chrono;
  EXPECT_EQ(e.timestamp, sys_days{2024y / January / 2} + 3h + 4min + 5s);

  r = parse(std::string(kHeader) +
            "s1,2024-01-02T03:04:05Z,a,h1,0,view\r\n"
            "s1,2024-01-02T03:04:05Z,a,h1,-1,view\r\n"
            "s2,2024-01-02T03:04:06.5Z,a,h2,1,view\r\n");
  EXPECT_EQ(r.events.size(), 2u);
  EXPECT_EQ(r.malformed, 1u);
}

TEST(ParseLog, RejectsBadHeaderAndMostlyMalformedInput) {
  EXPECT_THROW(parse("a,b,c\n"), FormatError);
  EXPECT_THROW(parse(std::string(kHeader) + "x\ny\ns1,2024-01-02T03:04:05Z,a,h1,0,view\n"),
               FormatError);
  std::ifstream missing("/nonexistent/log.csv");
  EXPECT_THROW(parse_log(missing), std::ios_base::failure);
}

TEST(ParseLog, QuotedFields) {
  const ParseResult r =
      parse(std::string(kHeader) + "\"s,1\",2024-01-02T03:04:05Z,\"are\"\"a\",h1,0,view\n");
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].session_id, "s,1");
  EXPECT_EQ(r.events[0].area_id, "are\"a");
}

TEST(Timestamp, RejectsInvalidDates) {
  std::chrono::sys_seconds t;
  EXPECT_TRUE(parse_utc_timestamp("2024-02-29T23:59:59Z", t));
  EXPECT_FALSE(parse_utc_timestamp("2023-02-29T00:00:00Z", t));
  EXPECT_FALSE(parse_utc_timestamp("2024-01-02 03:04:05", t));
  EXPECT_FALSE(parse_utc_timestamp("2024-01-02T03:04:05.Z", t));
}

TEST(EstimateSales, Examples) {
  const ItemUniverse one({"h"});
  std::vector<LogEvent> events;
  for (int k = 0; k < 10; ++k) events.push_back(view("s" + std::to_string(k), "h", 0));
  events.push_back(reserve("s0", "h", 0));
  EXPECT_DOUBLE_EQ(estimate_sales(events, one, {})(0, 0), 2.0 / 30.0);

  const ItemUniverse two({"p", "q"});
  const Matrix prior = estimate_sales({}, two, {});
  for (double v : prior.values()) EXPECT_DOUBLE_EQ(v, 1.0 / 20.0);

  // Item p seen only at position 0: cell (p, 1) is imputed.
  const std::vector<LogEvent> toy{view("s1", "p", 0), reserve("s1", "p", 0), view("s2", "q", 1)};
  const Matrix s = estimate_sales(toy, two, {});
  const double item_p = 2.0 / 21.0;
  const double pos_1 = 1.0 / 21.0;
  const double global = 2.0 / 22.0;
  EXPECT_DOUBLE_EQ(s(0, 1), item_p * pos_1 / global);
  EXPECT_GT(s(0, 1), 0.0);
}

TEST(EstimateSales, ToyFixtureMatchesHandComputation) {
  const std::vector<LogEvent> events = toy_log();
  std::vector<LogEvent> tokyo;
  for (const auto& e : events)
    if (e.area_id == "tokyo") tokyo.push_back(e);
  const Matrix s = estimate_sales(tokyo, ItemUniverse({"h1", "h2", "h3"}), {});
  // Views: h1 {2,1,0}, h2 {2,1,0}, h3 {0,1,1}; reserves h1@0, h2@0.
  // Imputed cells use item rate x position rate / global rate (3/28).
  const Matrix expected = Matrix::from_rows({{2.0 / 22, 1.0 / 21, 56.0 / 1449},
                                             {2.0 / 22, 1.0 / 21, 56.0 / 1449},
                                             {7.0 / 132, 1.0 / 21, 1.0 / 21}});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(s(i, j), expected(i, j)) << i << "," << j;
}

TEST(EstimateSales, EquivariantUnderRelabelling) {
  Xoshiro256 rng(4);
  std::vector<LogEvent> events;
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  for (int k = 0; k < 200; ++k) {
    const std::string& id = ids[rng.below(4)];
    const std::size_t pos = rng.below(4);
    events.push_back(view("s" + std::to_string(k % 37), id, pos));
    if (rng.below(5) == 0) events.push_back(reserve("s" + std::to_string(k % 37), id, pos));
  }
  const Matrix s = estimate_sales(events, ItemUniverse(ids), {});
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<std::string> relabelled(4);
  for (std::size_t i = 0; i < 4; ++i) relabelled[perm[i]] = ids[i];
  const Matrix t = estimate_sales(events, ItemUniverse(relabelled), {});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(t(perm[i], j), s(i, j));
}

TEST(Cobrowse, Examples) {
  const ItemUniverse u({"0", "1", "2"});
  Matrix f = cobrowse_similarity(std::vector<LogEvent>{view("s", "0", 0), view("s", "1", 1), view("s", "2", 2)}, u);
  EXPECT_EQ(f, Matrix::from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));

  f = cobrowse_similarity(std::vector<LogEvent>{view("s", "0", 0), view("t", "1", 0)}, u);
  EXPECT_EQ(f, Matrix::square(3));

  f = cobrowse_similarity(std::vector<LogEvent>{view("s", "0", 0), view("s", "0", 1), view("s", "1", 2)}, u);
  EXPECT_EQ(f(0, 1), 1.0);
}

TEST(Cobrowse, ToyFixtureMatchesHandCount) {
  const Matrix f = cobrowse_similarity(toy_log(), ItemUniverse({"h1", "h2", "h3"}));
  EXPECT_EQ(f, Matrix::from_rows({{0, 2, 2}, {2, 0, 1}, {2, 1, 0}}));
}

TEST(Cobrowse, SymmetricWithZeroDiagonal) {
  Xoshiro256 rng(9);
  std::vector<LogEvent> events;
  for (int k = 0; k < 300; ++k)
    events.push_back(view("s" + std::to_string(rng.below(40)), std::to_string(rng.below(6)), 0));
  const Matrix f = cobrowse_similarity(events, ItemUniverse({"0", "1", "2", "3", "4", "5"}));
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(f(i, i), 0.0);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(f(i, k), f(k, i));
  }
}

TEST(Znormalize, Examples) {
  const Matrix z = znormalize(Matrix::from_rows({{1, 2}, {3, 4}}), false);
  EXPECT_NEAR(z(0, 0), -1.3416, 1e-3);
  EXPECT_NEAR(z(0, 1), -0.4472, 1e-3);
  EXPECT_NEAR(z(1, 0), 0.4472, 1e-3);
  EXPECT_NEAR(z(1, 1), 1.3416, 1e-3);
  EXPECT_THROW(znormalize(Matrix::square(3, 2.0), false), DegenerateInputError);
}

TEST(Znormalize, MomentsIdempotenceAndAffineInvariance) {
  Xoshiro256 rng(3);
  for (bool excl : {false, true}) {
    const Matrix m = testing::random_matrix(6, 6, rng, 0.0, 50.0);
    const Matrix z = znormalize(m, excl);
    const auto [mean, sd] = mean_sd(z, excl);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_LT(std::abs(sd - 1.0), 1e-9);
    if (excl)
      for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(z(i, i), 0.0);

    const Matrix zz = znormalize(z, excl);
    for (std::size_t k = 0; k < z.values().size(); ++k) EXPECT_NEAR(zz.values()[k], z.values()[k], 1e-9);

    Matrix affine = m;
    for (double& v : affine.values()) v = -3.0 * v + 7.0;
    const Matrix za = znormalize(affine, excl);
    for (std::size_t k = 0; k < z.values().size(); ++k) EXPECT_NEAR(za.values()[k], -z.values()[k], 1e-9);
  }
}

TEST(Synthetic, DeterministicAndValid) {
  EXPECT_EQ(generate_synthetic(2, 7).sales, generate_synthetic(2, 7).sales);
  EXPECT_EQ(generate_synthetic(2, 7).similarity, generate_synthetic(2, 7).similarity);
  for (ProfileKind kind : {ProfileKind::clustered, ProfileKind::uniform})
    for (std::size_t n : {2u, 3u, 8u, 20u})
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticProfile profile;
        profile.kind = kind;
        EXPECT_TRUE(validate_instance(generate_synthetic(n, seed, profile)).empty());
      }
  EXPECT_THROW(generate_synthetic(1, 0), std::invalid_argument);
  EXPECT_NE(generate_synthetic(8, 1).sales, generate_synthetic(8, 2).sales);
}

TEST(Synthetic, ClusteredProfileSeparatesClusters) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticInstance g = generate_synthetic_labeled(8, seed);
    double within = 0.0, across = 0.0;
    int nw = 0, na = 0;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t k = i + 1; k < 8; ++k)
        if (g.cluster[i] == g.cluster[k]) {
          within += g.instance.similarity(i, k);
          ++nw;
        } else {
          across += g.instance.similarity(i, k);
          ++na;
        }
    EXPECT_GT(within / nw, across / na) << "seed " << seed;
  }
}

TEST(Synthetic, SalesAreNormalised) {
  const ListingInstance inst = generate_synthetic(10, 3);
  const auto [mean, sd] = mean_sd(inst.sales, false);
  EXPECT_LT(std::abs(mean), 1e-9);
  EXPECT_LT(std::abs(sd - 1.0), 1e-9);
}

TEST(BuildFromLog, ToyFixture) {
  IngestOptions opt;
  opt.area = "tokyo";
  opt.estimation.min_sessions = 1;
  const IngestSummary r = build_instance_from_log(toy_log(), opt);
  EXPECT_EQ(r.universe.ids(), (std::vector<std::string>{"h1", "h2", "h3"}));
  EXPECT_EQ(r.area_events, 10u);
  EXPECT_TRUE(validate_instance(r.instance).empty());
  EXPECT_LT(r.instance.similarity(1, 2), r.instance.similarity(0, 1));

  opt.n = 2;
  const IngestSummary two = build_instance_from_log(toy_log(), opt);
  EXPECT_EQ(two.universe.ids(), (std::vector<std::string>{"h1", "h2"}));
  EXPECT_EQ(two.instance.similarity, Matrix::square(2));
  opt.estimation.min_sessions = 4;
  EXPECT_THROW(build_instance_from_log(toy_log(), opt), DegenerateInputError);
  opt.estimation.min_sessions = 1;
  opt.area = "nowhere";
  EXPECT_THROW(build_instance_from_log(toy_log(), opt), DegenerateInputError);
}

}  // namespace
}  // namespace listing
