#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "porttfidf/record.hpp"
#include "porttfidf/types.hpp"

namespace porttfidf::synth {

/// Counter-based generator: the stream for (seed, event, day) is fixed
/// regardless of which thread draws it or in which order.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t event, std::int64_t day);

  std::uint64_t next();
  /// Uniform on [lo, hi].
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
  /// Uniform on [0, 1).
  double unit();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Uniform over unicast IPv4, skipping 0/8, 10/8, 127/8 and 224/3.
Ipv4 random_unicast(Stream& rng);

struct CountRange {
  Count lo = 0;
  Count hi = 0;
};

/// Steady daily traffic: a few very popular ports, ports seen every day,
/// full-range scan noise and low-volume recurring ports that spike once.
struct Background {
  Protocol protocol = Protocol::Tcp;
  /// (port, share of the day's background volume)
  std::vector<std::pair<Port, double>> popular_port_bias;
  std::size_t ports_per_day = 20;
  CountRange daily_count_range{120, 300};
  Count scan_noise_per_day = 1000;
  std::size_t minor_ports = 80;
  CountRange minor_baseline_range{10, 60};
  double minor_presence = 0.5;
  CountRange minor_spike_range{110, 200};
};

/// Scanner campaign on one TCP port: quadratic ramp, plateau, linear decay.
struct Burst {
  Port port = 0;
  Day start_day;
  std::size_t ramp_days = 4;
  std::size_t plateau_days = 0;
  Count peak_daily_count = 0;
  std::size_t decay_days = 0;
  double isn_fingerprint_fraction = 0;
};

/// Two TCP ports hit together, the shadow at volume_ratio of the primary.
struct CorrelatedPair {
  Port primary_port = 0;
  Port shadow_port = 0;
  double volume_ratio = 0.5;
  Day start;
  Day end;
  Count peak_daily_count = 0;
  std::size_t ramp_days = 3;
};

/// UDP traffic whose destination port changes every UTC midnight.
struct UdpWave {
  std::vector<std::pair<Day, Port>> port_schedule;
  Count daily_count = 0;
  std::array<double, 24> hourly_profile = default_hourly_profile();
  CountRange payload_range{65, 226};
  Port srcport_min = 50000;
  double high_srcport_fraction = 0.95;
  bool spoofed_sources = true;

  /// Day-night sinusoid peaking at 06:00 UTC.
  static std::array<double, 24> default_hourly_profile();
};

using Event = std::variant<Background, Burst, CorrelatedPair, UdpWave>;

struct ScenarioSpec {
  std::uint64_t seed = 1;
  DateRange date_range;
  Ipv4 telescope_prefix{0xC0000200};  // 192.0.2.0
  int telescope_prefix_len = 24;
  std::vector<Event> events;
};

struct Label {
  std::string type;  // "burst", "correlated_pair", "udp_wave"
  Protocol protocol = Protocol::Tcp;
  std::vector<Port> ports;  // primary port first
  std::vector<Day> days;
  std::vector<Count> daily_counts;         // primary port, aligned with days
  std::vector<Count> shadow_daily_counts;  // correlated_pair only
  std::vector<Port> schedule_ports;        // udp_wave only, aligned with days
  Day onset_day;
  Day peak_growth_day;  // burst only
  double planted_fraction = 0;  // burst: ISN share; udp_wave: high source port share
  Count planted_matches = 0;
  Count records = 0;
};

struct Scenario {
  std::vector<AccessRecord> records;  // sorted by timestamp
  std::vector<Label> labels;
};

/// Throws InvalidSpec for out-of-range parameters or anomaly events that
/// claim the same (protocol, port, day).
void validate(const ScenarioSpec& spec);

/// Generate the scenario. Per (event, day) chunks run in parallel and are
/// merged by timestamp deterministically.
Scenario generate(const ScenarioSpec& spec);

/// 92 days from 2020-07-01: popular-port background, a port 9530 burst from
/// 2020-07-30, an 8291/8728 pair from 2020-09-08 whose shadow stays under
/// 100 accesses a day, and a 5-day UDP wave from 2020-08-01.
ScenarioSpec paper_scenario(std::uint64_t seed = 20200801);

std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(std::string_view text);
std::string labels_to_json(const std::vector<Label>& labels);

/// NDJSON stream of all records.
std::string records_to_ndjson(const std::vector<AccessRecord>& records);

namespace reference {
/// Same output as synth::generate, chunks produced one after another.
Scenario generate(const ScenarioSpec& spec);
}  // namespace reference

}  // namespace porttfidf::synth
