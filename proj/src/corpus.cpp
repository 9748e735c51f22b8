#include "porttfidf/corpus.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace porttfidf {

DayDocument::DayDocument(Day day, Protocol protocol, const PortCounts& counts) : day_(day), protocol_(protocol) {
  for (auto [port, n] : counts) add(port, n);
}

Count DayDocument::count(Port port) const {
  auto it = counts_.find(port);
  return it == counts_.end() ? 0 : it->second;
}

void DayDocument::add(Port port, Count n) {
  if (n == 0) return;
  counts_[port] += n;
  total_ += n;
}

void DayDocument::erase(Port port) {
  auto it = counts_.find(port);
  if (it == counts_.end()) return;
  total_ -= it->second;
  counts_.erase(it);
}

Corpus::Corpus(Protocol protocol, std::vector<DayDocument> docs) : protocol_(protocol), docs_(std::move(docs)) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (docs_[i].protocol() != protocol_)
      throw Error(Errc::InvalidArgument, "document " + docs_[i].day().to_string() + " has the wrong protocol");
    if (i > 0 && docs_[i].day() != docs_[i - 1].day().next())
      throw Error(Errc::InvalidArgument, "corpus days are not consecutive at " + docs_[i].day().to_string());
  }
}

std::size_t Corpus::df(Port port) const {
  return static_cast<std::size_t>(
      std::count_if(docs_.begin(), docs_.end(), [port](const DayDocument& d) { return d.contains(port); }));
}

Day Corpus::first_day() const {
  if (docs_.empty()) throw Error(Errc::EmptyCorpus, "corpus is empty");
  return docs_.front().day();
}

Day Corpus::last_day() const {
  if (docs_.empty()) throw Error(Errc::EmptyCorpus, "corpus is empty");
  return docs_.back().day();
}

std::optional<std::size_t> Corpus::index_of(Day day) const {
  if (docs_.empty() || day < first_day() || day > last_day()) return std::nullopt;
  return static_cast<std::size_t>(day.value - first_day().value);
}

Count Corpus::total() const {
  Count t = 0;
  for (const auto& d : docs_) t += d.total();
  return t;
}

PortCounts HourlySeries::day_counts(Day day) const {
  PortCounts out;
  for (auto it = buckets.lower_bound({day, 0}); it != buckets.end() && it->first.first == day; ++it)
    for (auto [port, n] : it->second) out[port] += n;
  return out;
}

namespace {

Corpus build_corpus(Protocol protocol, const std::map<Day, PortCounts>& by_day) {
  if (by_day.empty()) throw Error(Errc::EmptyInput, "no " + std::string(to_string(protocol)) + " records");
  std::vector<DayDocument> docs;
  const Day first = by_day.begin()->first;
  const Day last = by_day.rbegin()->first;
  docs.reserve(static_cast<std::size_t>(last.value - first.value + 1));
  auto it = by_day.begin();
  for (Day d = first; d <= last; d = d.next()) {
    if (it != by_day.end() && it->first == d) {
      docs.emplace_back(d, protocol, it->second);
      ++it;
    } else {
      docs.emplace_back(d, protocol);
    }
  }
  return Corpus(protocol, std::move(docs));
}

// Packed keys for the per-thread tallies.
constexpr std::uint64_t day_key(Day d, Port p) {
  return (std::uint64_t{static_cast<std::uint32_t>(d.value)} << 16) | p;
}
constexpr std::uint64_t hour_key(Day d, int h, Port p) {
  return (std::uint64_t{static_cast<std::uint32_t>(d.value)} << 21) | (std::uint64_t(h) << 16) | p;
}

template <typename KeyFn>
std::vector<std::unordered_map<std::uint64_t, Count>> partitioned_tally(std::span<const AccessRecord> records,
                                                                        Protocol protocol, KeyFn key) {
  const auto n = static_cast<std::int64_t>(records.size());
  std::vector<std::unordered_map<std::uint64_t, Count>> partials(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
  {
    auto& mine = partials[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& r = records[static_cast<std::size_t>(i)];
      if (r.protocol == protocol) ++mine[key(r)];
    }
  }
  return partials;
}

}  // namespace

Corpus aggregate_daily(std::span<const AccessRecord> records, Protocol protocol) {
  auto partials = partitioned_tally(records, protocol, [](const AccessRecord& r) { return day_key(r.day(), r.dst_port); });
  std::map<Day, PortCounts> by_day;
  for (const auto& part : partials)
    for (auto [key, n] : part)
      by_day[Day{static_cast<std::int32_t>(static_cast<std::uint32_t>(key >> 16))}][static_cast<Port>(key & 0xffff)] += n;
  return build_corpus(protocol, by_day);
}

HourlySeries aggregate_hourly(std::span<const AccessRecord> records, Protocol protocol) {
  auto partials = partitioned_tally(records, protocol,
                                    [](const AccessRecord& r) { return hour_key(r.day(), hour_of(r.timestamp), r.dst_port); });
  HourlySeries series{protocol, {}};
  for (const auto& part : partials)
    for (auto [key, n] : part) {
      const Day d{static_cast<std::int32_t>(static_cast<std::uint32_t>(key >> 21))};
      const int h = static_cast<int>((key >> 16) & 0x1f);
      series.buckets[{d, h}][static_cast<Port>(key & 0xffff)] += n;
    }
  if (series.buckets.empty()) throw Error(Errc::EmptyInput, "no " + std::string(to_string(protocol)) + " records");
  return series;
}

std::vector<PortRatio> port_ratio_table(const Corpus& corpus, std::size_t top_k) {
  PortCounts sums;
  Count total = 0;
  for (const auto& doc : corpus.docs())
    for (auto [port, n] : doc.counts()) {
      sums[port] += n;
      total += n;
    }
  if (total == 0) throw Error(Errc::EmptyCorpus, "corpus has no accesses");
  std::vector<PortRatio> out;
  out.reserve(sums.size());
  for (auto [port, n] : sums) out.push_back({port, static_cast<double>(n) / static_cast<double>(total)});
  std::stable_sort(out.begin(), out.end(), [](const PortRatio& a, const PortRatio& b) { return a.ratio > b.ratio; });
  if (top_k != 0 && out.size() > top_k) out.resize(top_k);
  return out;
}

std::string corpus_to_json(const Corpus& corpus) {
  nlohmann::ordered_json j;
  j["protocol"] = to_string(corpus.protocol());
  auto days = nlohmann::ordered_json::array();
  for (const auto& doc : corpus.docs()) {
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (auto [port, n] : doc.counts()) counts[std::to_string(port)] = n;
    days.push_back({{"day", doc.day().to_string()}, {"counts", std::move(counts)}});
  }
  j["days"] = std::move(days);
  return j.dump() + "\n";
}

Corpus corpus_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("protocol") || !j.contains("days") || !j["days"].is_array())
    throw Error(Errc::MalformedRecord, "not a corpus document");
  try {
    const Protocol protocol = parse_protocol(j["protocol"].get<std::string>());
    std::vector<DayDocument> docs;
    for (const auto& d : j["days"]) {
      DayDocument doc(Day::parse(d.at("day").get<std::string>()), protocol);
      for (const auto& [key, value] : d.at("counts").items()) {
        int port = 0;
        auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), port);
        if (ec != std::errc{} || p != key.data() + key.size() || port < 0 || port > 65535)
          throw Error(Errc::FieldOutOfRange, "bad port key '" + key + "'");
        doc.add(static_cast<Port>(port), value.get<Count>());
      }
      docs.push_back(std::move(doc));
    }
    return Corpus(protocol, std::move(docs));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedRecord, std::string("corpus document: ") + e.what());
  }
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open corpus '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return corpus_from_json(ss.str());
}

namespace reference {

Corpus aggregate_daily(std::span<const AccessRecord> records, Protocol protocol) {
  std::map<Day, PortCounts> by_day;
  for (const auto& r : records)
    if (r.protocol == protocol) ++by_day[r.day()][r.dst_port];
  return build_corpus(protocol, by_day);
}

HourlySeries aggregate_hourly(std::span<const AccessRecord> records, Protocol protocol) {
  HourlySeries series{protocol, {}};
  for (const auto& r : records)
    if (r.protocol == protocol) ++series.buckets[{r.day(), hour_of(r.timestamp)}][r.dst_port];
  if (series.buckets.empty()) throw Error(Errc::EmptyInput, "no " + std::string(to_string(protocol)) + " records");
  return series;
}

}  // namespace reference
}  // namespace porttfidf
