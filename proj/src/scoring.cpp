#include "porttfidf/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "json.hpp"

namespace porttfidf {

std::string_view to_string(IdfMode m) { return m == IdfMode::Smoothed ? "smoothed" : "common"; }
std::string_view to_string(TfMode m) { return m == TfMode::Linear ? "linear" : "log"; }

IdfMode parse_idf_mode(std::string_view s) {
  if (s == "smoothed") return IdfMode::Smoothed;
  if (s == "common") return IdfMode::Common;
  throw Error(Errc::InvalidArgument, "unknown idf mode '" + std::string(s) + "'");
}

TfMode parse_tf_mode(std::string_view s) {
  if (s == "linear") return TfMode::Linear;
  if (s == "log") return TfMode::Log;
  throw Error(Errc::InvalidArgument, "unknown tf mode '" + std::string(s) + "'");
}

void ScoringConfig::validate() const {
  if (window_days < 2) throw Error(Errc::InvalidArgument, "window must be at least 2 days");
  if (top_k < 1) throw Error(Errc::InvalidArgument, "top-k must be at least 1");
}

double tf(Port port, const DayDocument& doc) {
  if (doc.total() == 0) throw Error(Errc::EmptyDocument, "document " + doc.day().to_string() + " is empty");
  return static_cast<double>(doc.count(port)) / static_cast<double>(doc.total());
}

double tf_log(Port port, const DayDocument& doc) {
  if (doc.total() == 0) throw Error(Errc::EmptyDocument, "document " + doc.day().to_string() + " is empty");
  const Count n = doc.count(port);
  if (n == 0) return 0.0;
  return std::log1p(static_cast<double>(n)) / std::log1p(static_cast<double>(doc.total()));
}

double idf_common(std::size_t n_docs, std::size_t df) {
  return std::log(static_cast<double>(n_docs) / (static_cast<double>(df) + 1.0));
}

double idf_smoothed(std::size_t n_docs, std::size_t df) { return idf_common(n_docs, df) + 1.0; }

double idf_smoothed(Port port, const Corpus& corpus) { return idf_smoothed(corpus.N(), corpus.df(port)); }
double idf_common(Port port, const Corpus& corpus) { return idf_common(corpus.N(), corpus.df(port)); }

namespace {

bool ranks_before(const TfidfScore& a, const TfidfScore& b) {
  if (a.tfidf != b.tfidf) return a.tfidf > b.tfidf;
  return a.port < b.port;
}

void check_window(const Corpus& corpus, std::size_t day_index, const ScoringConfig& config) {
  config.validate();
  if (day_index >= corpus.N())
    throw Error(Errc::RangeOutOfCorpus, "day index " + std::to_string(day_index) + " beyond corpus of " +
                                            std::to_string(corpus.N()) + " days");
  if (day_index + 1 < config.window_days)
    throw Error(Errc::InsufficientHistory, "day index " + std::to_string(day_index) + " has fewer than " +
                                               std::to_string(config.window_days) + " days of history");
}

}  // namespace

TfidfRanking score_day(const Corpus& corpus, std::size_t day_index, const ScoringConfig& config) {
  check_window(corpus, day_index, config);
  const auto& target = corpus[day_index];
  TfidfRanking ranking{target.day(), config.window_days, config.top_k, {}};
  if (target.empty()) return ranking;

  const std::size_t begin = day_index + 1 - config.window_days;
  ranking.entries.reserve(target.size());
  for (const auto& [port, n] : target.counts()) {
    std::size_t df = 0;
    for (std::size_t i = begin; i <= day_index; ++i) df += corpus[i].contains(port) ? 1 : 0;
    TfidfScore s;
    s.port = port;
    s.day = target.day();
    s.tf = config.tf_mode == TfMode::Linear ? tf(port, target) : tf_log(port, target);
    s.idf = config.idf_mode == IdfMode::Smoothed ? idf_smoothed(config.window_days, df)
                                                 : idf_common(config.window_days, df);
    s.tfidf = s.tf * s.idf;
    ranking.entries.push_back(s);
  }
  const auto keep = std::min(config.top_k, ranking.entries.size());
  std::partial_sort(ranking.entries.begin(), ranking.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    ranking.entries.end(), ranks_before);
  ranking.entries.resize(keep);
  return ranking;
}

std::vector<TfidfRanking> sliding_scan(const Corpus& corpus, const ScoringConfig& config) {
  config.validate();
  if (corpus.N() < config.window_days)
    throw Error(Errc::InsufficientHistory, "corpus has " + std::to_string(corpus.N()) + " days, window needs " +
                                               std::to_string(config.window_days));
  const auto first = static_cast<std::int64_t>(config.window_days - 1);
  const auto n = static_cast<std::int64_t>(corpus.N());
  std::vector<TfidfRanking> out(static_cast<std::size_t>(n - first));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = first; i < n; ++i)
    out[static_cast<std::size_t>(i - first)] = score_day(corpus, static_cast<std::size_t>(i), config);
  return out;
}

std::vector<HistoryPoint> port_history(const Corpus& corpus, Port port, DateRange range) {
  if (corpus.empty() || range.last < range.first || !corpus.index_of(range.first) || !corpus.index_of(range.last))
    throw Error(Errc::RangeOutOfCorpus, "range " + range.first.to_string() + ".." + range.last.to_string() +
                                            " is outside the corpus");
  std::vector<HistoryPoint> out;
  out.reserve(static_cast<std::size_t>(range.length()));
  for (auto i = *corpus.index_of(range.first); i <= *corpus.index_of(range.last); ++i)
    out.push_back({corpus[i].day(), corpus[i].count(port)});
  return out;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

}  // namespace

std::string rankings_to_json(const std::vector<TfidfRanking>& rankings, const ScoringConfig& config) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rankings) {
    nlohmann::ordered_json day;
    day["day"] = r.day.to_string();
    day["window"] = r.window_days;
    day["mode"] = {{"idf", to_string(config.idf_mode)}, {"tf", to_string(config.tf_mode)}};
    auto top = nlohmann::ordered_json::array();
    for (const auto& e : r.entries) top.push_back({{"port", e.port}, {"tf", e.tf}, {"idf", e.idf}, {"tfidf", e.tfidf}});
    day["top"] = std::move(top);
    arr.push_back(std::move(day));
  }
  return arr.dump(1) + "\n";
}

std::string rankings_to_csv(const std::vector<TfidfRanking>& rankings) {
  std::string out = "day,rank,port,tf,idf,tfidf\n";
  for (const auto& r : rankings) {
    const auto day = r.day.to_string();
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      const auto& e = r.entries[i];
      out += day;
      out += ',' + std::to_string(i + 1) + ',' + std::to_string(e.port) + ',';
      append_double(out, e.tf);
      out += ',';
      append_double(out, e.idf);
      out += ',';
      append_double(out, e.tfidf);
      out += '\n';
    }
  }
  return out;
}

std::string history_to_csv(const std::vector<HistoryPoint>& history) {
  std::string out = "day,count\n";
  for (const auto& h : history) out += h.day.to_string() + ',' + std::to_string(h.count) + '\n';
  return out;
}

namespace reference {

std::vector<TfidfRanking> sliding_scan(const Corpus& corpus, const ScoringConfig& config) {
  config.validate();
  if (corpus.N() < config.window_days)
    throw Error(Errc::InsufficientHistory, "corpus shorter than window");
  std::vector<TfidfRanking> out;
  for (std::size_t i = config.window_days - 1; i < corpus.N(); ++i) out.push_back(score_day(corpus, i, config));
  return out;
}

}  // namespace reference
}  // namespace porttfidf
