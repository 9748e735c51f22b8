#include "porttfidf/cleanse.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "porttfidf/scoring.hpp"

namespace porttfidf {

const PortSet& default_stop_ports() {
  static const PortSet ports{445, 23, 22, 80, 81, 8080, 443};
  return ports;
}

void CleanseConfig::validate() const {
  if (threshold && *threshold < 1) throw Error(Errc::InvalidArgument, "threshold must be at least 1");
  if (sweep_start < 1) throw Error(Errc::InvalidArgument, "sweep start must be at least 1");
  if (histogram_bins < 2) throw Error(Errc::InvalidArgument, "histogram needs at least 2 bins");
}

DayDocument apply_stop_ports(const DayDocument& doc, const PortSet& stop_ports) {
  DayDocument out(doc.day(), doc.protocol());
  for (auto [port, n] : doc.counts())
    if (!stop_ports.contains(port)) out.add(port, n);
  return out;
}

DayDocument apply_noise_threshold(const DayDocument& doc, Count threshold) {
  if (threshold < 1) throw Error(Errc::InvalidArgument, "threshold must be at least 1");
  DayDocument out(doc.day(), doc.protocol());
  for (auto [port, n] : doc.counts())
    if (n >= threshold) out.add(port, n);
  return out;
}

namespace {

template <typename Fn>
Corpus map_docs(const Corpus& corpus, Fn fn) {
  std::vector<DayDocument> docs;
  docs.reserve(corpus.N());
  for (const auto& d : corpus.docs()) docs.push_back(fn(d));
  return Corpus(corpus.protocol(), std::move(docs));
}

}  // namespace

Corpus apply_stop_ports(const Corpus& corpus, const PortSet& stop_ports) {
  return map_docs(corpus, [&](const DayDocument& d) { return apply_stop_ports(d, stop_ports); });
}

Corpus apply_noise_threshold(const Corpus& corpus, Count threshold) {
  return map_docs(corpus, [&](const DayDocument& d) { return apply_noise_threshold(d, threshold); });
}

IdfHistogram idf_histogram(const Corpus& corpus, Count threshold, std::size_t bins) {
  if (corpus.empty()) throw Error(Errc::EmptyCorpus, "corpus is empty");
  if (threshold < 1) throw Error(Errc::InvalidArgument, "threshold must be at least 1");
  if (bins < 2) throw Error(Errc::InvalidArgument, "histogram needs at least 2 bins");

  // df over the thresholded corpus, without materialising it
  std::map<Port, std::size_t> df;
  for (const auto& doc : corpus.docs())
    for (auto [port, n] : doc.counts())
      if (n >= threshold) ++df[port];
  if (df.empty())
    throw Error(Errc::NoSurvivingPorts, "no port reaches " + std::to_string(threshold) + " accesses on any day");

  IdfHistogram h;
  h.threshold = threshold;
  h.n_docs = corpus.N();
  h.idf_max = idf_smoothed(corpus.N(), 1);
  h.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.bin_edges[i] = h.idf_max * static_cast<double>(i) / static_cast<double>(bins);
  h.bin_edges.back() = h.idf_max;
  h.bin_counts.assign(bins, 0);
  h.distinct_ports = df.size();
  for (auto [port, d] : df) {
    if (d == 1) ++h.top_bin_count;
    const double v = idf_smoothed(corpus.N(), d);
    auto bin = static_cast<std::size_t>(std::floor(v / h.idf_max * static_cast<double>(bins)));
    if (d == 1 || bin >= bins) bin = bins - 1;
    ++h.bin_counts[bin];
  }
  return h;
}

SweepResult auto_select_threshold(const Corpus& corpus, Count sweep_start, std::size_t bins) {
  if (corpus.empty()) throw Error(Errc::EmptyCorpus, "corpus is empty");
  if (corpus.N() < 2) throw Error(Errc::InvalidArgument, "threshold sweep needs at least 2 days");
  if (sweep_start < 1) throw Error(Errc::InvalidArgument, "sweep start must be at least 1");

  SweepResult result;
  result.trace.push_back(idf_histogram(corpus, sweep_start, bins));
  result.threshold = sweep_start;
  for (Count t = sweep_start; t <= std::numeric_limits<Count>::max() / 2;) {
    t *= 2;
    IdfHistogram next;
    try {
      next = idf_histogram(corpus, t, bins);
    } catch (const Error& e) {
      if (e.code() != Errc::NoSurvivingPorts) throw;
      next.threshold = t;
      next.n_docs = corpus.N();
      next.idf_max = idf_smoothed(corpus.N(), 1);
      next.bin_edges = result.trace.back().bin_edges;
      next.bin_counts.assign(bins, 0);
      result.trace.push_back(std::move(next));
      break;
    }
    const bool dropped = next.top_bin_count < result.trace.back().top_bin_count;
    result.trace.push_back(std::move(next));
    if (dropped) break;
    result.threshold = t;
  }
  return result;
}

CleanseResult cleanse(const Corpus& corpus, const CleanseConfig& config) {
  config.validate();
  if (corpus.empty()) throw Error(Errc::EmptyCorpus, "corpus is empty");
  Corpus stopped = apply_stop_ports(corpus, config.stop_ports);
  CleanseResult out;
  if (config.threshold) {
    out.threshold = *config.threshold;
  } else {
    auto sweep = auto_select_threshold(stopped, config.sweep_start, config.histogram_bins);
    out.threshold = sweep.threshold;
    out.trace = std::move(sweep.trace);
  }
  out.corpus = apply_noise_threshold(stopped, out.threshold);
  return out;
}

Corpus cleanse_corpus(const Corpus& corpus, const CleanseConfig& config) { return cleanse(corpus, config).corpus; }

namespace {
void append_double(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}
}  // namespace

std::string sweep_trace_csv(const std::vector<IdfHistogram>& trace) {
  std::string out = "threshold,top_bin_count,distinct_ports\n";
  for (const auto& h : trace)
    out += std::to_string(h.threshold) + ',' + std::to_string(h.top_bin_count) + ',' + std::to_string(h.distinct_ports) + '\n';
  return out;
}

std::string histogram_csv(const IdfHistogram& hist) {
  std::string out = "bin_low,bin_high,count\n";
  for (std::size_t i = 0; i < hist.bin_counts.size(); ++i) {
    append_double(out, hist.bin_edges[i]);
    out += ',';
    append_double(out, hist.bin_edges[i + 1]);
    out += ',' + std::to_string(hist.bin_counts[i]) + '\n';
  }
  return out;
}

}  // namespace porttfidf
