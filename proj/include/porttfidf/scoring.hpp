#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "porttfidf/corpus.hpp"

namespace porttfidf {

enum class IdfMode { Smoothed, Common };
enum class TfMode { Linear, Log };

std::string_view to_string(IdfMode m);
std::string_view to_string(TfMode m);
IdfMode parse_idf_mode(std::string_view s);
TfMode parse_tf_mode(std::string_view s);

struct ScoringConfig {
  std::size_t window_days = 30;
  std::size_t top_k = 5;
  IdfMode idf_mode = IdfMode::Smoothed;
  TfMode tf_mode = TfMode::Linear;

  /// Throws InvalidArgument unless window_days >= 2 and top_k >= 1.
  void validate() const;
};

struct TfidfScore {
  Port port = 0;
  double tf = 0;
  double idf = 0;
  double tfidf = 0;
  Day day;
  bool operator==(const TfidfScore&) const = default;
};

/// Scores of one target day, highest tf-idf first, equal scores by
/// ascending port.
struct TfidfRanking {
  Day day;
  std::size_t window_days = 0;
  std::size_t k = 0;
  std::vector<TfidfScore> entries;
  bool operator==(const TfidfRanking&) const = default;
};

/// Share of the day's accesses going to `port`; 0 when absent. Throws
/// EmptyDocument when the document has no accesses.
double tf(Port port, const DayDocument& doc);
/// log(1 + n) / log(1 + total), in [0, 1].
double tf_log(Port port, const DayDocument& doc);

/// Smoothed idf from raw document counts: ln(N / (df + 1)) + 1.
double idf_smoothed(std::size_t n_docs, std::size_t df);
/// Common idf: ln(N / (df + 1)). May be negative when df >= N.
double idf_common(std::size_t n_docs, std::size_t df);

double idf_smoothed(Port port, const Corpus& corpus);
double idf_common(Port port, const Corpus& corpus);

/// Score every port present in docs[day_index] against the window of
/// `window_days` documents ending at day_index. An empty target day yields an
/// empty ranking. Throws InsufficientHistory when the window does not fit.
TfidfRanking score_day(const Corpus& corpus, std::size_t day_index, const ScoringConfig& config);

/// One ranking per day from window_days - 1 to N - 1. Days are scored in
/// parallel; the result does not depend on the schedule.
std::vector<TfidfRanking> sliding_scan(const Corpus& corpus, const ScoringConfig& config);

struct HistoryPoint {
  Day day;
  Count count = 0;
  bool operator==(const HistoryPoint&) const = default;
};

/// Per-day counts of `port` over `range`, zeros included. Throws
/// RangeOutOfCorpus if the range is not inside the corpus.
std::vector<HistoryPoint> port_history(const Corpus& corpus, Port port, DateRange range);

std::string rankings_to_json(const std::vector<TfidfRanking>& rankings, const ScoringConfig& config);
/// `day,rank,port,tf,idf,tfidf` with header.
std::string rankings_to_csv(const std::vector<TfidfRanking>& rankings);
/// `day,count` with header.
std::string history_to_csv(const std::vector<HistoryPoint>& history);

namespace reference {
std::vector<TfidfRanking> sliding_scan(const Corpus& corpus, const ScoringConfig& config);
}  // namespace reference

}  // namespace porttfidf
