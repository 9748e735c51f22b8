#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "porttfidf/corpus.hpp"

namespace porttfidf {

using PortSet = std::set<Port>;

/// Ports so common in darknet traffic that they carry no anomaly signal.
const PortSet& default_stop_ports();

struct CleanseConfig {
  PortSet stop_ports = default_stop_ports();
  std::optional<Count> threshold;  // nullopt: pick by IDF-histogram sweep
  Count sweep_start = 1000;
  std::size_t histogram_bins = 40;

  void validate() const;
};

struct IdfHistogram {
  Count threshold = 0;
  std::size_t n_docs = 0;
  double idf_max = 0;
  std::vector<double> bin_edges;  // bins + 1 ascending edges over [0, idf_max]
  std::vector<Count> bin_counts;
  /// Ports seen on exactly one day, i.e. holding the largest attainable IDF.
  Count top_bin_count = 0;
  Count distinct_ports = 0;
};

struct SweepResult {
  Count threshold = 0;
  std::vector<IdfHistogram> trace;
};

/// Drop every stop port from the document.
DayDocument apply_stop_ports(const DayDocument& doc, const PortSet& stop_ports);

/// Drop ports seen fewer than `threshold` times; a count equal to the
/// threshold survives.
DayDocument apply_noise_threshold(const DayDocument& doc, Count threshold);

Corpus apply_stop_ports(const Corpus& corpus, const PortSet& stop_ports);
Corpus apply_noise_threshold(const Corpus& corpus, Count threshold);

/// Histogram of smoothed IDF over the distinct ports surviving `threshold`.
/// Throws EmptyCorpus, or NoSurvivingPorts when the threshold removes
/// everything.
IdfHistogram idf_histogram(const Corpus& corpus, Count threshold, std::size_t bins = 40);

/// Double the threshold from `sweep_start` until the number of df = 1 ports
/// strictly drops, and return the threshold just before the drop. Equal
/// counts keep sweeping. The sweep also ends once a threshold removes every
/// port (recorded in the trace with distinct_ports = 0).
SweepResult auto_select_threshold(const Corpus& corpus, Count sweep_start, std::size_t bins = 40);

struct CleanseResult {
  Corpus corpus;
  Count threshold = 0;
  std::vector<IdfHistogram> trace;  // empty unless the threshold was swept
};

/// Stop ports first, then the noise threshold, per document. Day list is
/// unchanged.
CleanseResult cleanse(const Corpus& corpus, const CleanseConfig& config);
Corpus cleanse_corpus(const Corpus& corpus, const CleanseConfig& config);

/// `threshold,top_bin_count,distinct_ports`
std::string sweep_trace_csv(const std::vector<IdfHistogram>& trace);
/// `bin_low,bin_high,count`
std::string histogram_csv(const IdfHistogram& hist);

}  // namespace porttfidf
