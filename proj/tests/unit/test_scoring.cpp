#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "porttfidf/scoring.hpp"

using namespace porttfidf;

namespace {

// Values computed with 30-digit arithmetic.
constexpr double kIdf30_1 = 3.70805020110221006;
constexpr double kIdf30_30 = 0.967210177177009129;
constexpr double kCommon30_30 = -0.0327898228229908705;
constexpr double kOneMinusLn2 = 0.306852819440054690;
constexpr double kTfidf02 = 0.741610040220442013;

DayDocument doc(std::initializer_list<std::pair<const Port, Count>> c) { return DayDocument(Day{0}, Protocol::Tcp, c); }

ScoringConfig window(std::size_t w, std::size_t k = 5) {
  ScoringConfig s;
  s.window_days = w;
  s.top_k = k;
  return s;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

}  // namespace

TEST_SUITE("scoring") {
  TEST_CASE("tf") {
    CHECK(tf(9530, doc({{9530, 25}, {1433, 75}})) == 0.25);
    CHECK(tf(81, doc({{81, 7}})) == 1.0);
    CHECK(tf(22, doc({{81, 7}})) == 0.0);
    CHECK(code_of([] { tf(1, DayDocument{}); }) == Errc::EmptyDocument);
    CHECK(code_of([] { tf_log(1, DayDocument{}); }) == Errc::EmptyDocument);

    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 50; ++rep) {
      const auto t = oracle::random_table(rng, 1, 30, 1000);
      DayDocument d(Day{0}, Protocol::Tcp, t[0]);
      if (d.empty()) continue;
      double sum = 0;
      for (auto [p, n] : d.counts()) sum += tf(p, d);
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("tf_log") {
    CHECK(tf_log(22, doc({{81, 9}})) == 0.0);
    CHECK(tf_log(81, doc({{81, 9}})) == doctest::Approx(1.0).epsilon(1e-15));
    double prev = -1;
    for (Count n = 1; n <= 500; ++n) {
      const double v = tf_log(1, doc({{1, n}, {2, 300}}));
      CHECK(v > prev);
      CHECK(v <= 1.0);
      prev = v;
    }
  }

  TEST_CASE("idf pins") {
    CHECK(std::abs(idf_smoothed(30, 1) - kIdf30_1) <= 1e-12);
    CHECK(std::abs(idf_smoothed(30, 1) - 3.7080502) <= 1e-6);
    CHECK(std::abs(idf_smoothed(30, 30) - kIdf30_30) <= 1e-12);
    CHECK(std::abs(idf_smoothed(1, 1) - kOneMinusLn2) <= 1e-12);
    CHECK(std::abs(idf_common(30, 1) - (kIdf30_1 - 1)) <= 1e-12);
    CHECK(idf_common(2, 1) == 0.0);
    CHECK(std::abs(idf_common(30, 30) - kCommon30_30) <= 1e-12);
    CHECK(idf_common(30, 30) < 0);
    CHECK(std::abs(idf_smoothed(30, 0) - (std::log(30.0) + 1)) <= 1e-12);
  }

  TEST_CASE("idf by port reads N and df from the corpus") {
    oracle::Table t(30);
    t[29][9530] = 5;
    for (auto& d : t) d[1433] = 9;
    const auto c = oracle::from_table(t);
    CHECK(idf_smoothed(Port{9530}, c) == idf_smoothed(30, 1));
    CHECK(idf_smoothed(Port{1433}, c) == idf_smoothed(30, 30));
    CHECK(idf_common(Port{9530}, c) == idf_common(30, 1));
    CHECK(idf_smoothed(Port{7}, c) == idf_smoothed(30, 0));
  }

  TEST_CASE("smoothed minus common is one") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::size_t> nd(1, 100000);
    for (int i = 0; i < 1000; ++i) {
      const std::size_t n = nd(rng);
      const std::size_t df = std::uniform_int_distribution<std::size_t>(0, n)(rng);
      CHECK(std::abs(idf_smoothed(n, df) - idf_common(n, df) - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("idf strictly decreasing in df") {
    for (std::size_t n : {2u, 7u, 30u, 365u})
      for (std::size_t df = 1; df <= n; ++df) CHECK(idf_smoothed(n, df) < idf_smoothed(n, df - 1));
  }

  TEST_CASE("smoothed idf stays positive for df <= N") {
    for (std::size_t n = 2; n <= 200; ++n) CHECK(idf_smoothed(n, n) > 0);
  }

  TEST_CASE("planted spike ranks first") {
    // 9530 shows up only on the last day with tf 0.2; every other port is
    // seen on at least 15 days.
    oracle::Table t(30);
    for (int d = 0; d < 30; ++d) {
      t[d][1433] = 100;
      if (d % 2 == 0) t[d][5555] = 50;
      t[d][21] = 20;
    }
    t[29] = {{9530, 40}, {1433, 100}, {5555, 30}, {21, 30}};
    const auto r = score_day(oracle::from_table(t), 29, window(30));
    REQUIRE(!r.entries.empty());
    CHECK(r.entries[0].port == 9530);
    CHECK(r.entries[0].tf == 0.2);
    CHECK(std::abs(r.entries[0].tfidf - kTfidf02) <= 1e-12);
    CHECK(r.day == Day{18475 + 29});
    CHECK(r.window_days == 30);
  }

  TEST_CASE("constant idf ranks by tf") {
    oracle::Table t(30);
    for (auto& d : t) d = {{1, 5}, {2, 9}, {3, 7}, {4, 9}};
    const auto r = score_day(oracle::from_table(t), 29, window(30));
    REQUIRE(r.entries.size() == 4);
    for (const auto& e : r.entries) CHECK(std::abs(e.idf - kIdf30_30) <= 1e-12);
    // 2 and 4 tie on tf; lower port first
    CHECK(r.entries[0].port == 2);
    CHECK(r.entries[1].port == 4);
    CHECK(r.entries[2].port == 3);
    CHECK(r.entries[3].port == 1);
  }

  TEST_CASE("empty target day gives an empty ranking") {
    oracle::Table t(3);
    t[0][80] = 1;
    const auto r = score_day(oracle::from_table(t), 2, window(3));
    CHECK(r.entries.empty());
  }

  TEST_CASE("window bounds") {
    const auto c = oracle::from_table(oracle::Table(5, {{1, 1}}));
    CHECK(code_of([&] { score_day(c, 2, window(4)); }) == Errc::InsufficientHistory);
    CHECK(code_of([&] { score_day(c, 5, window(2)); }) == Errc::RangeOutOfCorpus);
    CHECK(code_of([&] { sliding_scan(c, window(6)); }) == Errc::InsufficientHistory);
    CHECK(code_of([] { window(1).validate(); }) == Errc::InvalidArgument);
    CHECK(code_of([] { window(30, 0).validate(); }) == Errc::InvalidArgument);
  }

  TEST_CASE("df and N come from the window only") {
    // 80 is everywhere before the window; inside it 80 appears once.
    oracle::Table t(10, {{80, 3}, {21, 3}});
    for (int d = 7; d < 10; ++d) t[d].erase(80);
    t[9][80] = 3;
    const auto r = score_day(oracle::from_table(t), 9, window(3));
    auto it = std::find_if(r.entries.begin(), r.entries.end(), [](auto& e) { return e.port == 80; });
    REQUIRE(it != r.entries.end());
    CHECK(it->idf == idf_smoothed(3, 1));
  }

  TEST_CASE("ranking counts") {
    CHECK(sliding_scan(oracle::from_table(oracle::Table(30, {{1, 1}})), window(30)).size() == 1);
    const auto scans = sliding_scan(oracle::from_table(oracle::Table(91, {{1, 1}})), window(30));
    CHECK(scans.size() == 62);
  }

  TEST_CASE("score_day matches brute force") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 200; ++rep) {
      const auto t = oracle::random_table(rng, 5, 6, 100, 2);
      const auto c = oracle::from_table(t);
      const auto r = score_day(c, c.N() - 1, window(c.N(), 6));
      const auto expect = oracle::brute_force_tfidf(t);
      REQUIRE(r.entries.size() == expect.size());
      for (const auto& e : r.entries) {
        auto it = std::find_if(expect.begin(), expect.end(), [&](auto& x) { return x.port == e.port; });
        REQUIRE(it != expect.end());
        CHECK(oracle::rel_close(e.tf, it->tf, 1e-12));
        CHECK(oracle::rel_close(e.idf, it->idf, 1e-12));
        CHECK(oracle::rel_close(e.tfidf, it->tfidf, 1e-12));
      }
    }
  }

  TEST_CASE("ranking order, truncation and tfidf = tf * idf") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 100; ++rep) {
      const auto c = oracle::from_table(oracle::random_table(rng, 12, 40, 50, 4));
      for (const auto& r : sliding_scan(c, window(4, 5))) {
        CHECK(r.entries.size() <= 5);
        const std::size_t present = c[*c.index_of(r.day)].size();
        CHECK(r.entries.size() == std::min<std::size_t>(5, present));
        for (std::size_t i = 0; i < r.entries.size(); ++i) {
          const auto& e = r.entries[i];
          CHECK(oracle::rel_close(e.tfidf, e.tf * e.idf, 1e-12));
          CHECK(e.tfidf >= 0);
          if (i > 0) {
            const auto& p = r.entries[i - 1];
            CHECK((p.tfidf > e.tfidf || (p.tfidf == e.tfidf && p.port < e.port)));
          }
        }
      }
    }
  }

  TEST_CASE("scaling the target day keeps the order") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 50; ++rep) {
      auto t = oracle::random_table(rng, 6, 20, 30, 3);
      const auto a = score_day(oracle::from_table(t), t.size() - 1, window(t.size(), 20));
      for (auto& [p, n] : t.back()) n *= 7;
      const auto b = score_day(oracle::from_table(t), t.size() - 1, window(t.size(), 20));
      REQUIRE(a.entries.size() == b.entries.size());
      for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(a.entries[i].port == b.entries[i].port);
    }
  }

  TEST_CASE("equal df ports follow tf order") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 50; ++rep) {
      const auto c = oracle::from_table(oracle::random_table(rng, 6, 20, 30, 3));
      const auto r = score_day(c, c.N() - 1, window(c.N(), 20));
      for (std::size_t i = 0; i < r.entries.size(); ++i)
        for (std::size_t j = i + 1; j < r.entries.size(); ++j)
          if (r.entries[i].idf == r.entries[j].idf) CHECK(r.entries[i].tf >= r.entries[j].tf);
    }
  }

  TEST_CASE("common and log modes") {
    oracle::Table t(4, {{1, 10}, {2, 5}});
    t[3][3] = 5;
    const auto c = oracle::from_table(t);
    ScoringConfig s = window(4);
    s.idf_mode = IdfMode::Common;
    s.tf_mode = TfMode::Log;
    const auto r = score_day(c, 3, s);
    for (const auto& e : r.entries) {
      CHECK(e.idf == idf_common(4, c.df(e.port)));
      CHECK(e.tf == tf_log(e.port, c[3]));
    }
    CHECK(parse_idf_mode("common") == IdfMode::Common);
    CHECK(parse_tf_mode("log") == TfMode::Log);
    CHECK_THROWS_AS(parse_tf_mode("sqrt"), Error);
  }

  TEST_CASE("port history") {
    oracle::Table t(5);
    t[2][9530] = 700;
    t[3][9530] = 4;
    const auto c = oracle::from_table(t);
    const auto h = port_history(c, 9530, c.range());
    REQUIRE(h.size() == 5);
    CHECK(h[0].count == 0);
    CHECK(h[2].count == 700);
    CHECK(h[3].count == 4);
    for (auto& p : port_history(c, 1, c.range())) CHECK(p.count == 0);
    CHECK(code_of([&] { port_history(c, 1, {c.first_day().prev(), c.last_day()}); }) == Errc::RangeOutOfCorpus);
    CHECK(history_to_csv(h).rfind("day,count\n", 0) == 0);
  }

  TEST_CASE("port history sums to the tally") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 30; ++rep) {
      const auto t = oracle::random_table(rng, 10, 8, 40, 2);
      const auto c = oracle::from_table(t);
      for (auto [p, n] : t[0]) {
        Count expect = 0;
        for (const auto& d : t)
          if (auto it = d.find(p); it != d.end()) expect += it->second;
        Count got = 0;
        for (auto& h : port_history(c, p, c.range())) got += h.count;
        CHECK(got == expect);
      }
    }
  }

  TEST_CASE("ranking output formats") {
    oracle::Table t(2, {{9530, 3}, {23, 1}});
    const auto c = oracle::from_table(t);
    const auto rs = sliding_scan(c, window(2));
    const auto json = nlohmann::json::parse(rankings_to_json(rs, window(2)));
    REQUIRE(json.size() == 1);
    CHECK(json[0]["day"] == "2020-08-02");
    CHECK(json[0]["window"] == 2);
    CHECK(json[0]["mode"] == nlohmann::json{{"idf", "smoothed"}, {"tf", "linear"}});
    CHECK(json[0]["top"][0]["port"] == 9530);
    CHECK(json[0]["top"][0]["tfidf"].get<double>() == rs[0].entries[0].tfidf);
    const auto csv = rankings_to_csv(rs);
    CHECK(csv.rfind("day,rank,port,tf,idf,tfidf\n", 0) == 0);
    CHECK(csv.find(",1,9530,0.75,") != std::string::npos);
  }
}
