#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "porttfidf/cleanse.hpp"
#include "porttfidf/corpus.hpp"
#include "porttfidf/record.hpp"

namespace porttfidf {

// Mirai-family scanners send their first SYN with ISN == destination address.
struct IsnReport {
  Port port = 0;
  Count total_syn = 0;
  Count matched = 0;
  double fraction = 0;
};

/// Considers TCP records to `port` that carry an ISN. Throws NoSamples if
/// there are none.
IsnReport isn_fingerprint(std::span<const AccessRecord> records, Port port);

/// True when the ISN equals the destination address read as a big-endian
/// 32-bit integer.
bool has_mirai_isn(const AccessRecord& r);

struct WaveSegment {
  Day day;
  std::optional<Port> dominant_port;  // nullopt on a day without traffic
  double share = 0;
  Count day_total = 0;
};

struct WaveReport {
  std::vector<WaveSegment> segments;  // one per day in range
  bool rotation_detected = false;
  int boundary_hour = 0;  // day boundaries are UTC midnight
  /// Longest qualifying run of rotating days.
  std::size_t run_start = 0;
  std::size_t run_length = 0;
  /// Within the run, the last active hour before each midnight belongs to the
  /// outgoing port and the first hour after it to the incoming one.
  bool boundary_aligned = false;
};

struct WaveOptions {
  double min_share = 0.8;
  std::size_t min_days = 3;
  PortSet stop_ports = default_stop_ports();
};

/// Per day, the non-stop port with the largest daily total and its share of
/// all traffic that day. Rotation means at least min_days consecutive days
/// each dominated (share >= min_share) by a port different from the
/// previous day's. Throws EmptyRange / InvalidArgument.
WaveReport detect_wave(const HourlySeries& hourly, DateRange range, const WaveOptions& options = {});

enum class DistributionKind { PayloadLen, SrcPort };

struct Distribution {
  DistributionKind kind = DistributionKind::PayloadLen;
  std::map<std::uint32_t, Count> histogram;  // exact value -> count
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  Count total = 0;
};

/// Only records with dst_port == port contribute. Throws NoSamples.
Distribution payload_distribution(std::span<const AccessRecord> records, Port port);

struct SrcPortDistribution {
  Distribution distribution;
  double high_fraction = 0;  // share of sources at or above 50000
};

SrcPortDistribution srcport_distribution(std::span<const AccessRecord> records, Port port);

inline constexpr Port kEphemeralFloor = 50000;

/// Position of a /8 block on the order-4 Hilbert curve over a 16x16 grid.
/// Block 0 sits at (0,0), block 1 at (1,0), block 255 at (15,0).
std::pair<int, int> hilbert_xy(int block);

struct HilbertHeatmap {
  Port port = 0;
  std::optional<DateRange> range;
  std::array<std::array<Count, 16>, 16> grid{};  // grid[y][x]
};

/// Distinct source addresses per /8 block, for records to `port` whose day
/// falls in `range` (all days when unset). Throws NoSamples.
HilbertHeatmap source_heatmap(std::span<const AccessRecord> records, Port port,
                              std::optional<DateRange> range = std::nullopt);

std::string isn_report_json(const IsnReport& report);
std::string wave_report_json(const WaveReport& report);
/// `value,count`
std::string distribution_csv(const Distribution& dist);
/// `x,y,count`, one row per cell.
std::string heatmap_csv(const HilbertHeatmap& map);
std::string heatmap_svg(const HilbertHeatmap& map);

}  // namespace porttfidf
