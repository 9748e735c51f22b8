#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "porttfidf/record.hpp"
#include "porttfidf/types.hpp"

namespace porttfidf {

using PortCounts = std::map<Port, Count>;

/// One UTC day of destination-port access counts for one protocol.
/// Absent ports have count 0; stored counts are always positive.
class DayDocument {
 public:
  DayDocument() = default;
  DayDocument(Day day, Protocol protocol) : day_(day), protocol_(protocol) {}
  DayDocument(Day day, Protocol protocol, const PortCounts& counts);

  Day day() const { return day_; }
  Protocol protocol() const { return protocol_; }
  const PortCounts& counts() const { return counts_; }

  Count count(Port port) const;
  bool contains(Port port) const { return counts_.contains(port); }
  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  Count total() const { return total_; }

  void add(Port port, Count n);
  void erase(Port port);

  bool operator==(const DayDocument&) const = default;

 private:
  Day day_{};
  Protocol protocol_ = Protocol::Tcp;
  PortCounts counts_;
  Count total_ = 0;
};

/// Consecutive run of day documents. Days without traffic are present as
/// empty documents and still count toward N.
class Corpus {
 public:
  Corpus() = default;
  /// Throws InvalidArgument if days are not strictly consecutive or a
  /// document's protocol differs.
  Corpus(Protocol protocol, std::vector<DayDocument> docs);

  Protocol protocol() const { return protocol_; }
  const std::vector<DayDocument>& docs() const { return docs_; }
  const DayDocument& operator[](std::size_t i) const { return docs_[i]; }

  std::size_t N() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  std::size_t df(Port port) const;

  Day first_day() const;
  Day last_day() const;
  DateRange range() const { return {first_day(), last_day()}; }
  std::optional<std::size_t> index_of(Day day) const;

  /// Records counted across all documents.
  Count total() const;

  bool operator==(const Corpus&) const = default;

 private:
  Protocol protocol_ = Protocol::Tcp;
  std::vector<DayDocument> docs_;
};

/// Per (UTC day, hour) port counts.
struct HourlySeries {
  using Key = std::pair<Day, int>;

  Protocol protocol = Protocol::Tcp;
  std::map<Key, PortCounts> buckets;

  /// Sum of a day's 24 buckets.
  PortCounts day_counts(Day day) const;
  bool operator==(const HourlySeries&) const = default;
};

/// Aggregate records of `protocol` into one document per UTC day spanning
/// the min..max record date. Parallel over input partitions. Throws
/// EmptyInput when no record matches the protocol.
Corpus aggregate_daily(std::span<const AccessRecord> records, Protocol protocol);

/// As aggregate_daily, bucketed by (UTC day, hour). Only non-empty buckets
/// are stored.
HourlySeries aggregate_hourly(std::span<const AccessRecord> records, Protocol protocol);

struct PortRatio {
  Port port;
  double ratio;
  bool operator==(const PortRatio&) const = default;
};

/// Share of all accesses in the corpus going to each port, largest first
/// (ties by ascending port), truncated to `top_k`. Pass top_k = 0 for the
/// full list. Throws EmptyCorpus when the corpus has no counts.
std::vector<PortRatio> port_ratio_table(const Corpus& corpus, std::size_t top_k);

/// Persistence as `{"protocol":"tcp","days":[{"day":"...","counts":{"port":n}}]}`.
std::string corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(std::string_view text);
Corpus load_corpus(const std::string& path);

namespace reference {
Corpus aggregate_daily(std::span<const AccessRecord> records, Protocol protocol);
HourlySeries aggregate_hourly(std::span<const AccessRecord> records, Protocol protocol);
}  // namespace reference

}  // namespace porttfidf
