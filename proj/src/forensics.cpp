#include "porttfidf/forensics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "json.hpp"

namespace porttfidf {

bool has_mirai_isn(const AccessRecord& r) { return r.tcp_isn && *r.tcp_isn == r.dst_ip.value; }

IsnReport isn_fingerprint(std::span<const AccessRecord> records, Port port) {
  IsnReport rep;
  rep.port = port;
  for (const auto& r : records) {
    if (r.protocol != Protocol::Tcp || r.dst_port != port || !r.tcp_isn) continue;
    ++rep.total_syn;
    if (has_mirai_isn(r)) ++rep.matched;
  }
  if (rep.total_syn == 0) throw Error(Errc::NoSamples, "no TCP SYN records with an ISN to port " + std::to_string(port));
  rep.fraction = static_cast<double>(rep.matched) / static_cast<double>(rep.total_syn);
  return rep;
}

namespace {

// Largest non-stop port; ties go to the lower port.
std::optional<std::pair<Port, Count>> dominant(const PortCounts& counts, const PortSet& stop_ports) {
  std::optional<std::pair<Port, Count>> best;
  for (auto [port, n] : counts) {
    if (stop_ports.contains(port)) continue;
    if (!best || n > best->second) best = {port, n};
  }
  return best;
}

std::optional<Port> dominant_in_hour(const HourlySeries& hourly, Day day, bool last, const PortSet& stop_ports) {
  for (int i = 0; i < 24; ++i) {
    const int h = last ? 23 - i : i;
    auto it = hourly.buckets.find({day, h});
    if (it == hourly.buckets.end()) continue;
    if (auto d = dominant(it->second, stop_ports)) return d->first;
  }
  return std::nullopt;
}

}  // namespace

WaveReport detect_wave(const HourlySeries& hourly, DateRange range, const WaveOptions& options) {
  if (!(options.min_share > 0.5 && options.min_share <= 1.0))
    throw Error(Errc::InvalidArgument, "min share must be in (0.5, 1]");
  if (options.min_days < 2) throw Error(Errc::InvalidArgument, "min days must be at least 2");
  if (range.last < range.first) throw Error(Errc::EmptyRange, "date range is empty");
  auto lo = hourly.buckets.lower_bound({range.first, 0});
  if (lo == hourly.buckets.end() || lo->first.first > range.last)
    throw Error(Errc::EmptyRange, "no traffic between " + range.first.to_string() + " and " + range.last.to_string());

  WaveReport rep;
  std::vector<char> qualifies;
  for (Day d = range.first; d <= range.last; d = d.next()) {
    const auto counts = hourly.day_counts(d);
    WaveSegment seg{d, std::nullopt, 0.0, 0};
    for (auto [port, n] : counts) seg.day_total += n;
    if (auto best = dominant(counts, options.stop_ports)) {
      seg.dominant_port = best->first;
      seg.share = static_cast<double>(best->second) / static_cast<double>(seg.day_total);
    }
    qualifies.push_back(seg.dominant_port && seg.share >= options.min_share);
    rep.segments.push_back(seg);
  }

  std::size_t run_start = 0, run_len = 0;
  for (std::size_t i = 0; i < rep.segments.size(); ++i) {
    if (!qualifies[i]) {
      run_len = 0;
      continue;
    }
    if (run_len > 0 && rep.segments[i].dominant_port != rep.segments[i - 1].dominant_port) {
      ++run_len;
    } else {
      run_start = i;
      run_len = 1;
    }
    if (run_len > rep.run_length) {
      rep.run_start = run_start;
      rep.run_length = run_len;
    }
  }
  rep.rotation_detected = rep.run_length >= options.min_days;

  if (rep.run_length >= 2) {
    rep.boundary_aligned = true;
    for (std::size_t i = rep.run_start + 1; i < rep.run_start + rep.run_length; ++i) {
      const auto& before = rep.segments[i - 1];
      const auto& after = rep.segments[i];
      if (dominant_in_hour(hourly, before.day, true, options.stop_ports) != before.dominant_port ||
          dominant_in_hour(hourly, after.day, false, options.stop_ports) != after.dominant_port) {
        rep.boundary_aligned = false;
        break;
      }
    }
  }
  return rep;
}

namespace {

template <typename ValueFn>
Distribution tally(std::span<const AccessRecord> records, Port port, DistributionKind kind, ValueFn value) {
  Distribution dist;
  dist.kind = kind;
  for (const auto& r : records) {
    if (r.dst_port != port) continue;
    ++dist.histogram[value(r)];
    ++dist.total;
  }
  if (dist.total == 0) throw Error(Errc::NoSamples, "no records to port " + std::to_string(port));
  dist.min = dist.histogram.begin()->first;
  dist.max = dist.histogram.rbegin()->first;
  return dist;
}

}  // namespace

Distribution payload_distribution(std::span<const AccessRecord> records, Port port) {
  return tally(records, port, DistributionKind::PayloadLen, [](const AccessRecord& r) { return r.payload_len; });
}

SrcPortDistribution srcport_distribution(std::span<const AccessRecord> records, Port port) {
  SrcPortDistribution out;
  out.distribution =
      tally(records, port, DistributionKind::SrcPort, [](const AccessRecord& r) { return std::uint32_t{r.src_port}; });
  Count high = 0;
  for (auto it = out.distribution.histogram.lower_bound(kEphemeralFloor); it != out.distribution.histogram.end(); ++it)
    high += it->second;
  out.high_fraction = static_cast<double>(high) / static_cast<double>(out.distribution.total);
  return out;
}

std::pair<int, int> hilbert_xy(int block) {
  if (block < 0 || block > 255) throw Error(Errc::BlockOutOfRange, "/8 block " + std::to_string(block) + " outside 0-255");
  // Table-driven walk from the most significant quadrant down.
  unsigned state = 0, x = 0, y = 0;
  const auto s = static_cast<unsigned>(block);
  for (int i = 6; i >= 0; i -= 2) {
    const unsigned row = 4 * state | ((s >> i) & 3);
    x = (x << 1) | ((0x936Cu >> row) & 1);
    y = (y << 1) | ((0x39C6u >> row) & 1);
    state = (0x3E6B94C1u >> (2 * row)) & 3;
  }
  return {static_cast<int>(x), static_cast<int>(y)};
}

HilbertHeatmap source_heatmap(std::span<const AccessRecord> records, Port port, std::optional<DateRange> range) {
  HilbertHeatmap map;
  map.port = port;
  map.range = range;
  std::unordered_set<std::uint32_t> sources;
  for (const auto& r : records) {
    if (r.dst_port != port) continue;
    if (range && !range->contains(r.day())) continue;
    sources.insert(r.src_ip.value);
  }
  if (sources.empty()) throw Error(Errc::NoSamples, "no records to port " + std::to_string(port) + " in range");
  std::array<Count, 256> per_block{};
  for (auto ip : sources) ++per_block[ip >> 24];
  for (int b = 0; b < 256; ++b) {
    auto [x, y] = hilbert_xy(b);
    map.grid[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = per_block[static_cast<std::size_t>(b)];
  }
  return map;
}

std::string isn_report_json(const IsnReport& report) {
  nlohmann::ordered_json j{{"port", report.port},
                           {"total_syn", report.total_syn},
                           {"matched", report.matched},
                           {"fraction", report.fraction}};
  return j.dump(1) + "\n";
}

std::string wave_report_json(const WaveReport& report) {
  nlohmann::ordered_json j;
  auto segs = nlohmann::ordered_json::array();
  for (const auto& s : report.segments) {
    nlohmann::ordered_json seg;
    seg["day"] = s.day.to_string();
    seg["dominant_port"] = s.dominant_port ? nlohmann::ordered_json(*s.dominant_port) : nlohmann::ordered_json(nullptr);
    seg["share"] = s.share;
    seg["day_total"] = s.day_total;
    segs.push_back(std::move(seg));
  }
  j["segments"] = std::move(segs);
  j["rotation_detected"] = report.rotation_detected;
  j["boundary_hour"] = report.boundary_hour;
  j["boundary_aligned"] = report.boundary_aligned;
  if (report.run_length > 0) {
    j["run"] = {{"first", report.segments[report.run_start].day.to_string()},
                {"last", report.segments[report.run_start + report.run_length - 1].day.to_string()},
                {"days", report.run_length}};
  }
  return j.dump(1) + "\n";
}

std::string distribution_csv(const Distribution& dist) {
  std::string out = "value,count\n";
  for (auto [v, n] : dist.histogram) out += std::to_string(v) + ',' + std::to_string(n) + '\n';
  return out;
}

std::string heatmap_csv(const HilbertHeatmap& map) {
  std::string out = "x,y,count\n";
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      out += std::to_string(x) + ',' + std::to_string(y) + ',' + std::to_string(map.grid[y][x]) + '\n';
  return out;
}

std::string heatmap_svg(const HilbertHeatmap& map) {
  constexpr int cell = 24;
  constexpr int side = 16 * cell;
  Count peak = 0;
  for (const auto& row : map.grid)
    for (auto c : row) peak = std::max(peak, c);

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n", side,
                side + 24, side, side + 24);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"4\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">port %u: distinct sources per /8</text>\n",
                static_cast<unsigned>(map.port));
  out += buf;
  for (int b = 0; b < 256; ++b) {
    auto [x, y] = hilbert_xy(b);
    const Count c = map.grid[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
    // log scale, white for empty blocks
    const double t = (c == 0 || peak == 0) ? 0.0 : std::log1p(double(c)) / std::log1p(double(peak));
    const int shade = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    // y grows upward in grid coordinates
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"rgb(255,%d,%d)\" stroke=\"#ccc\">"
                  "<title>%d/8: %llu</title></rect>\n",
                  x * cell, 24 + (15 - y) * cell, cell, cell, shade, shade, b, static_cast<unsigned long long>(c));
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace porttfidf
