#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "porttfidf/corpus.hpp"

using namespace porttfidf;

namespace {

constexpr std::int64_t kAug1 = 1596240000;  // 2020-08-01 00:00:00 UTC

AccessRecord rec(std::int64_t ts, Protocol p, Port dport, Port sport = 40000) {
  AccessRecord r;
  r.timestamp = ts;
  r.protocol = p;
  r.src_ip = Ipv4{0xC6336407};
  r.src_port = sport;
  r.dst_ip = Ipv4{0xC0000209};
  r.dst_port = dport;
  return r;
}

std::vector<AccessRecord> random_records(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::int64_t> ts(kAug1 - 5 * 86400, kAug1 + 5 * 86400);
  std::uniform_int_distribution<int> port(0, 40);
  std::bernoulli_distribution udp(0.3);
  std::vector<AccessRecord> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(rec(ts(rng), udp(rng) ? Protocol::Udp : Protocol::Tcp, static_cast<Port>(20 + port(rng))));
  return out;
}

}  // namespace

TEST_SUITE("types") {
  TEST_CASE("day conversions") {
    CHECK(Day::from_epoch_seconds(kAug1).to_string() == "2020-08-01");
    CHECK(Day::parse("2020-08-01").epoch_seconds() == kAug1);
    CHECK(Day::from_epoch_seconds(-1).to_string() == "1969-12-31");
    CHECK(hour_of(kAug1) == 0);
    CHECK(hour_of(1596272399) == 8);
    CHECK(hour_of(-1) == 23);
    CHECK_THROWS_AS(Day::parse("2020-13-01"), Error);
    CHECK(DateRange{Day::parse("2020-07-01"), Day::parse("2020-09-30")}.length() == 92);
  }

  TEST_CASE("ipv4 round trip and big-endian value") {
    const auto ip = Ipv4::parse("192.0.2.9");
    CHECK(ip.value == 0xC0000209u);
    CHECK(ip.value == 3221225993u);
    CHECK(ip.first_octet() == 192);
    CHECK(ip.to_string() == "192.0.2.9");
    CHECK_THROWS_AS(Ipv4::parse("256.1.1.1"), Error);
    CHECK_THROWS_AS(Ipv4::parse("1.2.3"), Error);
  }

  TEST_CASE("protocol parsing") {
    CHECK(parse_protocol("tcp") == Protocol::Tcp);
    CHECK(parse_protocol("udp") == Protocol::Udp);
    try {
      parse_protocol("icmp");
      FAIL("expected UnsupportedProtocol");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::UnsupportedProtocol);
    }
  }
}

TEST_SUITE("record") {
  TEST_CASE("ndjson record maps fields") {
    const auto r = parse_record(
        R"({"ts":1596240000,"proto":"udp","src":"198.51.100.7","sport":51234,"dst":"192.0.2.9","dport":58246,"plen":128})",
        RecordFormat::Ndjson);
    CHECK(r.protocol == Protocol::Udp);
    CHECK(r.dst_port == 58246);
    CHECK(r.payload_len == 128);
    CHECK(r.src_port == 51234);
    CHECK(r.src_ip.to_string() == "198.51.100.7");
    CHECK_FALSE(r.tcp_isn.has_value());
  }

  TEST_CASE("csv record with isn") {
    const auto r = parse_record("1596240000,tcp,198.51.100.7,44321,192.0.2.9,9530,0,3221226219", RecordFormat::Csv);
    CHECK(r.protocol == Protocol::Tcp);
    CHECK(r.dst_port == 9530);
    REQUIRE(r.tcp_isn.has_value());
    CHECK(*r.tcp_isn == 3221226219u);
  }

  TEST_CASE("record errors carry their kind") {
    auto code_of = [](std::string_view line, RecordFormat f) {
      try {
        parse_record(line, f);
      } catch (const Error& e) {
        return e.code();
      }
      return Errc::Io;
    };
    CHECK(code_of(R"({"ts":1596240000,"proto":"icmp","src":"1.2.3.4","sport":1,"dst":"1.2.3.5","dport":2,"plen":0})",
                  RecordFormat::Ndjson) == Errc::UnsupportedProtocol);
    CHECK(code_of(R"({"ts":1,"proto":"tcp","src":"1.2.3.4","sport":1,"dst":"1.2.3.5","dport":70000,"plen":0})",
                  RecordFormat::Ndjson) == Errc::FieldOutOfRange);
    CHECK(code_of(R"({"ts":1,"proto":"tcp","src":"1.2.3.400","sport":1,"dst":"1.2.3.5","dport":7,"plen":0})",
                  RecordFormat::Ndjson) == Errc::FieldOutOfRange);
    CHECK(code_of(R"({"ts":1,"proto":"udp","src":"1.2.3.4","sport":1,"dst":"1.2.3.5","dport":7,"plen":0,"isn":5})",
                  RecordFormat::Ndjson) == Errc::FieldOutOfRange);
    CHECK(code_of(R"({"ts":1,"proto":"tcp")", RecordFormat::Ndjson) == Errc::MalformedRecord);
    CHECK(code_of("1,tcp,1.2.3.4,1", RecordFormat::Csv) == Errc::MalformedRecord);
    CHECK(code_of("1,tcp,1.2.3.4,x,1.2.3.5,7,0", RecordFormat::Csv) == Errc::MalformedRecord);
  }

  TEST_CASE("buffer errors name the line") {
    const std::string text = "1596240000,tcp,1.2.3.4,1,1.2.3.5,7,0\n\n1596240000,tcp,1.2.3.4,1,1.2.3.5,99999,0\n";
    try {
      parse_records(text, RecordFormat::Csv);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }

  TEST_CASE("serialisers round trip") {
    std::mt19937_64 rng(7);
    auto recs = random_records(rng, 200);
    recs[3].tcp_isn = 3221225993u;
    recs[3].protocol = Protocol::Tcp;
    recs[5].payload_len = 1400;
    std::string nd, csv;
    for (const auto& r : recs) {
      append_ndjson(nd, r);
      append_csv(csv, r);
    }
    CHECK(parse_records(nd, RecordFormat::Ndjson) == recs);
    CHECK(parse_records(csv, RecordFormat::Csv) == recs);
  }

  TEST_CASE("format from path") {
    CHECK(record_format_for_path("x/records.csv") == RecordFormat::Csv);
    CHECK(record_format_for_path("records.ndjson") == RecordFormat::Ndjson);
  }
}

TEST_SUITE("corpus") {
  TEST_CASE("counting one day") {
    std::vector<AccessRecord> recs(3, rec(kAug1 + 10, Protocol::Tcp, 23));
    const auto c = aggregate_daily(recs, Protocol::Tcp);
    REQUIRE(c.N() == 1);
    CHECK(c[0].count(23) == 3);
    CHECK(c[0].size() == 1);
    CHECK(c.first_day().to_string() == "2020-08-01");
  }

  TEST_CASE("gap days become empty documents") {
    std::vector<AccessRecord> recs{rec(kAug1, Protocol::Tcp, 23), rec(kAug1 + 2 * 86400, Protocol::Tcp, 23)};
    const auto c = aggregate_daily(recs, Protocol::Tcp);
    REQUIRE(c.N() == 3);
    CHECK(c[1].empty());
    CHECK(c[1].day().to_string() == "2020-08-02");
    CHECK(c.df(23) == 2);
  }

  TEST_CASE("protocol filter and EmptyInput") {
    std::vector<AccessRecord> recs{rec(kAug1, Protocol::Udp, 53)};
    try {
      aggregate_daily(recs, Protocol::Tcp);
      FAIL("expected EmptyInput");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptyInput);
    }
    CHECK_THROWS_AS(aggregate_hourly(std::span<const AccessRecord>{}, Protocol::Udp), Error);
  }

  TEST_CASE("hour buckets") {
    std::vector<AccessRecord> recs{rec(kAug1, Protocol::Udp, 53), rec(1596272399, Protocol::Udp, 53)};
    const auto h = aggregate_hourly(recs, Protocol::Udp);
    const Day d = Day::parse("2020-08-01");
    CHECK(h.buckets.at({d, 0}).at(53) == 1);
    CHECK(h.buckets.at({d, 8}).at(53) == 1);
    CHECK(h.buckets.size() == 2);
  }

  TEST_CASE("conservation against an independent tally") {
    std::mt19937_64 rng(11);
    const auto recs = random_records(rng, 1000);
    for (Protocol p : {Protocol::Tcp, Protocol::Udp}) {
      std::map<std::pair<std::int64_t, Port>, Count> tally;
      Count n = 0;
      for (const auto& r : recs)
        if (r.protocol == p) {
          ++tally[{r.day().value, r.dst_port}];
          ++n;
        }
      const auto c = aggregate_daily(recs, p);
      CHECK(c.total() == n);
      Count sum = 0;
      for (const auto& d : c.docs()) {
        sum += d.total();
        for (auto [port, k] : d.counts()) CHECK(tally.at({d.day().value, port}) == k);
      }
      CHECK(sum == n);
    }
  }

  TEST_CASE("DayDocument keeps no zero entries") {
    DayDocument d(Day{0}, Protocol::Tcp);
    d.add(80, 0);
    CHECK(d.empty());
    d.add(80, 4);
    d.add(80, 1);
    CHECK(d.count(80) == 5);
    CHECK(d.total() == 5);
    d.erase(80);
    CHECK(d.total() == 0);
    CHECK(d.count(80) == 0);
  }

  TEST_CASE("corpus rejects non-consecutive days") {
    std::vector<DayDocument> docs{DayDocument(Day{10}, Protocol::Tcp), DayDocument(Day{12}, Protocol::Tcp)};
    CHECK_THROWS_AS(Corpus(Protocol::Tcp, docs), Error);
    std::vector<DayDocument> mixed{DayDocument(Day{10}, Protocol::Tcp), DayDocument(Day{11}, Protocol::Udp)};
    CHECK_THROWS_AS(Corpus(Protocol::Tcp, mixed), Error);
    try {
      Corpus{}.first_day();
      FAIL("expected EmptyCorpus");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptyCorpus);
    }
  }

  TEST_CASE("port ratio table") {
    oracle::Table t{{{445, 101}, {23, 71}, {9999, 828}}};
    const auto rows = port_ratio_table(oracle::from_table(t), 0);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].port == 9999);
    CHECK(rows[1].port == 445);
    CHECK(rows[1].ratio == doctest::Approx(0.101).epsilon(1e-12));
    CHECK(rows[2].port == 23);
    CHECK(rows[2].ratio == doctest::Approx(0.071).epsilon(1e-12));
    CHECK(port_ratio_table(oracle::from_table(t), 2).size() == 2);

    const auto lone = port_ratio_table(oracle::from_table({{{80, 5}}}), 5);
    REQUIRE(lone.size() == 1);
    CHECK(lone[0] == PortRatio{80, 1.0});

    CHECK_THROWS_AS(port_ratio_table(oracle::from_table({{}}), 5), Error);
  }

  TEST_CASE("port ratio table matches a recount") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
      const auto t = oracle::random_table(rng, 10, 50, 500);
      std::map<Port, Count> per_port;
      Count total = 0;
      for (const auto& d : t)
        for (auto [p, n] : d) {
          per_port[p] += n;
          total += n;
        }
      if (total == 0) continue;
      const auto rows = port_ratio_table(oracle::from_table(t), 0);
      CHECK(rows.size() == per_port.size());
      double sum = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].ratio == doctest::Approx(double(per_port.at(rows[i].port)) / double(total)).epsilon(1e-12));
        if (i > 0) CHECK((rows[i - 1].ratio > rows[i].ratio || (rows[i - 1].ratio == rows[i].ratio && rows[i - 1].port < rows[i].port)));
        sum += rows[i].ratio;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }

  TEST_CASE("df never decreases when a document is added") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 30; ++rep) {
      auto t = oracle::random_table(rng, 8, 10, 5);
      const auto before = oracle::from_table(t);
      t.push_back(oracle::random_table(rng, 1, 10, 5).front());
      const auto after = oracle::from_table(t);
      for (const auto& d : after.docs())
        for (auto [p, n] : d.counts()) CHECK(after.df(p) >= before.df(p));
    }
  }

  TEST_CASE("json persistence round trip") {
    std::mt19937_64 rng(9);
    const auto c = oracle::from_table(oracle::random_table(rng, 6, 12, 40, 3));
    const auto text = corpus_to_json(c);
    CHECK(text.find("\"protocol\":\"tcp\"") != std::string::npos);
    CHECK(corpus_from_json(text) == c);
    CHECK_THROWS_AS(corpus_from_json("{\"protocol\":\"tcp\"}"), Error);
    try {
      load_corpus("/nonexistent/corpus.json");
      FAIL("expected Io");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Io);
    }
  }
}
