#include "porttfidf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <tuple>

#include "json.hpp"
#include "porttfidf/cleanse.hpp"

namespace porttfidf::synth {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Stream::Stream(std::uint64_t seed, std::uint64_t event, std::int64_t day)
    : key_(mix(mix(mix(seed) ^ (event * kGolden)) ^ static_cast<std::uint64_t>(day))) {}

std::uint64_t Stream::next() { return mix(key_ + (++counter_) * kGolden); }

std::uint64_t Stream::uniform(std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo;
  if (span == ~std::uint64_t{0}) return next();
  const std::uint64_t range = span + 1;
  // rejection keeps the draw exactly uniform
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range + 1) % range;
  std::uint64_t v;
  do v = next();
  while (v > limit);
  return lo + v % range;
}

double Stream::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

Ipv4 random_unicast(Stream& rng) {
  while (true) {
    const auto v = static_cast<std::uint32_t>(rng.next() >> 32);
    const auto octet = v >> 24;
    if (octet == 0 || octet == 10 || octet == 127 || octet >= 224) continue;
    return Ipv4{v};
  }
}

std::array<double, 24> UdpWave::default_hourly_profile() {
  std::array<double, 24> w{};
  for (int h = 0; h < 24; ++h) w[h] = 1.0 + 0.6 * std::cos(2.0 * std::numbers::pi * (h - 6) / 24.0);
  return w;
}

namespace {

Error invalid(const std::string& what) { return Error(Errc::InvalidSpec, what); }

Protocol event_protocol(const Event& e) {
  if (auto b = std::get_if<Background>(&e)) return b->protocol;
  if (std::holds_alternative<UdpWave>(e)) return Protocol::Udp;
  return Protocol::Tcp;
}

// Planted-property selection with an exact total: record k of a stream is
// selected iff floor((k+1)f) > floor(kf), f in parts per million.
constexpr bool planted(Count k, Count ppm) { return ((k + 1) * ppm) / 1000000 > (k * ppm) / 1000000; }
constexpr Count planted_total(Count n, Count ppm) { return (n * ppm) / 1000000; }
Count to_ppm(double f) { return static_cast<Count>(std::llround(f * 1e6)); }

std::vector<Count> burst_profile(const Burst& b) {
  std::vector<Count> c;
  for (std::size_t i = 1; i <= b.ramp_days; ++i) {
    const double r = static_cast<double>(i) / static_cast<double>(b.ramp_days);
    c.push_back(static_cast<Count>(std::llround(static_cast<double>(b.peak_daily_count) * r * r)));
  }
  for (std::size_t i = 0; i < b.plateau_days; ++i) c.push_back(b.peak_daily_count);
  for (std::size_t j = 1; j <= b.decay_days; ++j)
    c.push_back(static_cast<Count>(std::llround(static_cast<double>(b.peak_daily_count) *
                                                static_cast<double>(b.decay_days + 1 - j) /
                                                static_cast<double>(b.decay_days + 1))));
  return c;
}

std::vector<Count> pair_profile(const CorrelatedPair& p) {
  const auto len = static_cast<std::size_t>(p.end.value - p.start.value + 1);
  const double ramp = static_cast<double>(std::max<std::size_t>(p.ramp_days, 1));
  std::vector<Count> c(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double f = std::min({1.0, static_cast<double>(i + 1) / ramp, static_cast<double>(len - i) / ramp});
    c[i] = static_cast<Count>(std::llround(static_cast<double>(p.peak_daily_count) * f));
  }
  return c;
}

Count shadow_count(Count primary, double ratio) {
  return static_cast<Count>(std::llround(static_cast<double>(primary) * ratio));
}

// Split `total` across 24 hours by weight, largest remainder first.
std::array<Count, 24> allocate_hours(Count total, const std::array<double, 24>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::array<Count, 24> out{};
  std::array<double, 24> rem{};
  Count used = 0;
  for (int h = 0; h < 24; ++h) {
    const double exact = static_cast<double>(total) * weights[h] / sum;
    out[h] = static_cast<Count>(std::floor(exact));
    rem[h] = exact - static_cast<double>(out[h]);
    used += out[h];
  }
  std::array<int, 24> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (Count i = 0; used < total; ++i, ++used) ++out[order[i % 24]];
  return out;
}

// Anomaly (protocol, port, day) claims. Background traffic is not a claim.
using Claim = std::tuple<Protocol, Port, std::int32_t>;

std::vector<Claim> claims_of(const Event& e, DateRange range) {
  std::vector<Claim> out;
  auto add = [&](Protocol pr, Port port, Day d) {
    if (range.contains(d)) out.emplace_back(pr, port, d.value);
  };
  if (auto b = std::get_if<Burst>(&e)) {
    const auto prof = burst_profile(*b);
    for (std::size_t i = 0; i < prof.size(); ++i)
      if (prof[i] > 0) add(Protocol::Tcp, b->port, Day{b->start_day.value + static_cast<std::int32_t>(i)});
  } else if (auto p = std::get_if<CorrelatedPair>(&e)) {
    for (Day d = p->start; d <= p->end; d = d.next()) {
      add(Protocol::Tcp, p->primary_port, d);
      add(Protocol::Tcp, p->shadow_port, d);
    }
  } else if (auto w = std::get_if<UdpWave>(&e)) {
    for (auto [d, port] : w->port_schedule) add(Protocol::Udp, port, d);
  }
  return out;
}

void check_range(const CountRange& r, const char* what) {
  if (r.lo > r.hi) throw invalid(std::string(what) + " range has lo > hi");
}

}  // namespace

void validate(const ScenarioSpec& spec) {
  if (spec.date_range.last < spec.date_range.first) throw invalid("date range is empty");
  if (spec.telescope_prefix_len < 8 || spec.telescope_prefix_len > 32) throw invalid("telescope prefix length must be 8-32");
  std::set<Claim> claimed;
  for (const auto& e : spec.events) {
    if (auto b = std::get_if<Background>(&e)) {
      double sum = 0;
      for (auto [port, r] : b->popular_port_bias) {
        if (r < 0) throw invalid("negative popular port share");
        sum += r;
      }
      if (sum >= 1.0) throw invalid("popular port shares must sum below 1");
      check_range(b->daily_count_range, "daily_count");
      check_range(b->minor_baseline_range, "minor_baseline");
      check_range(b->minor_spike_range, "minor_spike");
      if (b->minor_presence < 0 || b->minor_presence > 1) throw invalid("minor_presence must be in [0,1]");
    } else if (auto bu = std::get_if<Burst>(&e)) {
      if (bu->ramp_days < 1) throw invalid("burst ramp_days must be at least 1");
      if (bu->isn_fingerprint_fraction < 0 || bu->isn_fingerprint_fraction > 1)
        throw invalid("isn_fingerprint_fraction must be in [0,1]");
    } else if (auto p = std::get_if<CorrelatedPair>(&e)) {
      if (!(p->volume_ratio > 0 && p->volume_ratio <= 1)) throw invalid("volume_ratio must be in (0,1]");
      if (p->end < p->start) throw invalid("correlated pair ends before it starts");
      if (p->primary_port == p->shadow_port) throw invalid("correlated pair uses the same port twice");
    } else if (auto w = std::get_if<UdpWave>(&e)) {
      if (w->port_schedule.empty()) throw invalid("udp wave has an empty schedule");
      double sum = 0;
      for (double x : w->hourly_profile) {
        if (x < 0) throw invalid("negative hourly weight");
        sum += x;
      }
      if (!(sum > 0)) throw invalid("hourly profile sums to zero");
      check_range(w->payload_range, "payload");
      if (w->srcport_min == 0) throw invalid("srcport_min must be positive");
      if (w->high_srcport_fraction < 0 || w->high_srcport_fraction > 1)
        throw invalid("high_srcport_fraction must be in [0,1]");
    }
    for (const auto& c : claims_of(e, spec.date_range))
      if (!claimed.insert(c).second)
        throw invalid("events overlap on " + std::string(to_string(std::get<0>(c))) + " port " +
                      std::to_string(std::get<1>(c)) + " on " + Day{std::get<2>(c)}.to_string());
  }
}

namespace {

// Deterministic per-event preparation shared by every day chunk.
struct Prepared {
  // background
  std::vector<Port> steady;
  std::vector<Port> minor;
  std::vector<Day> minor_spike_day;
  // burst / pair / wave: counts per day keyed by offset from date_range.first
  std::vector<Count> daily;         // primary volume per range day (0 when idle)
  std::vector<Count> shadow_daily;  // pair only
  std::vector<Count> offset;        // records of this event before each day
  std::vector<Port> wave_port;      // per range day, 0 when idle
};

struct Plan {
  const ScenarioSpec* spec;
  std::vector<Prepared> prepared;
  std::size_t days;
};

Plan prepare(const ScenarioSpec& spec) {
  validate(spec);
  Plan plan{&spec, {}, static_cast<std::size_t>(spec.date_range.length())};
  const Day first = spec.date_range.first;

  std::set<std::pair<Protocol, Port>> anomaly_ports;
  for (const auto& e : spec.events)
    for (const auto& c : claims_of(e, {Day{-1000000}, Day{1000000}})) anomaly_ports.insert({std::get<0>(c), std::get<1>(c)});

  for (std::size_t ei = 0; ei < spec.events.size(); ++ei) {
    const auto& e = spec.events[ei];
    Prepared prep;
    prep.daily.assign(plan.days, 0);
    prep.shadow_daily.assign(plan.days, 0);
    prep.wave_port.assign(plan.days, 0);
    auto in_range = [&](Day d) -> std::optional<std::size_t> {
      if (!spec.date_range.contains(d)) return std::nullopt;
      return static_cast<std::size_t>(d.value - first.value);
    };

    if (auto b = std::get_if<Background>(&e)) {
      Stream rng(spec.seed, ei, -1);
      std::set<Port> taken;
      for (auto p : default_stop_ports()) taken.insert(p);
      for (auto [port, r] : b->popular_port_bias) taken.insert(port);
      for (auto [pr, port] : anomaly_ports)
        if (pr == b->protocol) taken.insert(port);
      auto pick = [&] {
        while (true) {
          const auto p = static_cast<Port>(rng.uniform(1024, 65535));
          if (taken.insert(p).second) return p;
        }
      };
      for (std::size_t i = 0; i < b->ports_per_day; ++i) prep.steady.push_back(pick());
      for (std::size_t i = 0; i < b->minor_ports; ++i) {
        prep.minor.push_back(pick());
        prep.minor_spike_day.push_back(Day{first.value + static_cast<std::int32_t>(rng.uniform(0, plan.days - 1))});
      }
    } else if (auto bu = std::get_if<Burst>(&e)) {
      const auto prof = burst_profile(*bu);
      for (std::size_t i = 0; i < prof.size(); ++i)
        if (auto k = in_range(Day{bu->start_day.value + static_cast<std::int32_t>(i)})) prep.daily[*k] = prof[i];
    } else if (auto p = std::get_if<CorrelatedPair>(&e)) {
      const auto prof = pair_profile(*p);
      for (std::size_t i = 0; i < prof.size(); ++i)
        if (auto k = in_range(Day{p->start.value + static_cast<std::int32_t>(i)})) {
          prep.daily[*k] = prof[i];
          prep.shadow_daily[*k] = shadow_count(prof[i], p->volume_ratio);
        }
    } else if (auto w = std::get_if<UdpWave>(&e)) {
      for (auto [d, port] : w->port_schedule)
        if (auto k = in_range(d)) {
          prep.daily[*k] = w->daily_count;
          prep.wave_port[*k] = port;
        }
    }
    prep.offset.assign(plan.days, 0);
    for (std::size_t k = 1; k < plan.days; ++k) prep.offset[k] = prep.offset[k - 1] + prep.daily[k - 1];
    plan.prepared.push_back(std::move(prep));
  }
  return plan;
}

struct Emitter {
  const ScenarioSpec& spec;
  Stream& rng;
  Day day;
  std::vector<AccessRecord>& out;

  Ipv4 telescope_addr() {
    const int host_bits = 32 - spec.telescope_prefix_len;
    const std::uint32_t mask = host_bits == 32 ? ~0u : ((1u << host_bits) - 1);
    return Ipv4{(spec.telescope_prefix.value & ~mask) | static_cast<std::uint32_t>(rng.uniform(0, mask))};
  }

  AccessRecord base(Protocol pr, Port dport, std::int64_t ts) {
    AccessRecord r;
    r.timestamp = ts;
    r.protocol = pr;
    r.src_ip = random_unicast(rng);
    r.src_port = static_cast<Port>(rng.uniform(1024, 65535));
    r.dst_ip = telescope_addr();
    r.dst_port = dport;
    return r;
  }

  std::int64_t any_second() { return day.epoch_seconds() + static_cast<std::int64_t>(rng.uniform(0, 86399)); }

  std::uint32_t random_isn(const Ipv4& dst) {
    auto isn = static_cast<std::uint32_t>(rng.next() >> 32);
    return isn == dst.value ? isn ^ 1u : isn;
  }

  void plain(Protocol pr, Port dport, Count n) {
    for (Count i = 0; i < n; ++i) {
      auto r = base(pr, dport, any_second());
      if (pr == Protocol::Tcp)
        r.tcp_isn = random_isn(r.dst_ip);
      else
        r.payload_len = static_cast<std::uint32_t>(rng.uniform(8, 512));
      out.push_back(r);
    }
  }
};

void emit_background(const Plan& plan, std::size_t ei, const Background& b, Day day, std::vector<AccessRecord>& out) {
  const auto& prep = plan.prepared[ei];
  Stream rng(plan.spec->seed, ei, day.value);
  Emitter em{*plan.spec, rng, day, out};

  std::vector<std::pair<Port, Count>> counts;
  Count others = 0;
  for (auto port : prep.steady) {
    const Count n = rng.uniform(b.daily_count_range.lo, b.daily_count_range.hi);
    counts.emplace_back(port, n);
    others += n;
  }
  for (std::size_t i = 0; i < prep.minor.size(); ++i) {
    Count n = 0;
    if (prep.minor_spike_day[i] == day)
      n = rng.uniform(b.minor_spike_range.lo, b.minor_spike_range.hi);
    else if (rng.unit() < b.minor_presence)
      n = rng.uniform(b.minor_baseline_range.lo, b.minor_baseline_range.hi);
    counts.emplace_back(prep.minor[i], n);
    others += n;
  }
  others += b.scan_noise_per_day;
  double popular_share = 0;
  for (auto [port, r] : b.popular_port_bias) popular_share += r;
  const double day_total = static_cast<double>(others) / (1.0 - popular_share);
  for (auto [port, r] : b.popular_port_bias) counts.emplace_back(port, static_cast<Count>(std::llround(r * day_total)));

  for (auto [port, n] : counts) em.plain(b.protocol, port, n);
  for (Count i = 0; i < b.scan_noise_per_day; ++i)
    em.plain(b.protocol, static_cast<Port>(rng.uniform(1, 65535)), 1);
}

void emit_burst(const Plan& plan, std::size_t ei, const Burst& b, std::size_t k, Day day, std::vector<AccessRecord>& out) {
  const auto& prep = plan.prepared[ei];
  Stream rng(plan.spec->seed, ei, day.value);
  Emitter em{*plan.spec, rng, day, out};
  const Count ppm = to_ppm(b.isn_fingerprint_fraction);
  for (Count i = 0; i < prep.daily[k]; ++i) {
    auto r = em.base(Protocol::Tcp, b.port, em.any_second());
    r.tcp_isn = planted(prep.offset[k] + i, ppm) ? r.dst_ip.value : em.random_isn(r.dst_ip);
    out.push_back(r);
  }
}

void emit_pair(const Plan& plan, std::size_t ei, const CorrelatedPair& p, std::size_t k, Day day,
               std::vector<AccessRecord>& out) {
  const auto& prep = plan.prepared[ei];
  Stream rng(plan.spec->seed, ei, day.value);
  Emitter em{*plan.spec, rng, day, out};
  em.plain(Protocol::Tcp, p.primary_port, prep.daily[k]);
  em.plain(Protocol::Tcp, p.shadow_port, prep.shadow_daily[k]);
}

void emit_wave(const Plan& plan, std::size_t ei, const UdpWave& w, std::size_t k, Day day, std::vector<AccessRecord>& out) {
  const auto& prep = plan.prepared[ei];
  if (prep.daily[k] == 0) return;
  Stream rng(plan.spec->seed, ei, day.value);
  Emitter em{*plan.spec, rng, day, out};
  // non-spoofed waves come from a small fixed pool of senders
  std::vector<Ipv4> pool;
  if (!w.spoofed_sources) {
    Stream pool_rng(plan.spec->seed, ei, -1);
    for (int i = 0; i < 50; ++i) pool.push_back(random_unicast(pool_rng));
  }
  const Count ppm = to_ppm(w.high_srcport_fraction);
  const auto hours = allocate_hours(prep.daily[k], w.hourly_profile);
  Count i = 0;
  for (int h = 0; h < 24; ++h)
    for (Count j = 0; j < hours[h]; ++j, ++i) {
      AccessRecord r;
      r.timestamp = day.epoch_seconds() + h * 3600 + static_cast<std::int64_t>(rng.uniform(0, 3599));
      r.protocol = Protocol::Udp;
      r.src_ip = w.spoofed_sources ? random_unicast(rng) : pool[rng.uniform(0, pool.size() - 1)];
      if (planted(prep.offset[k] + i, ppm))
        r.src_port = static_cast<Port>(rng.uniform(w.srcport_min, 65535));
      else
        r.src_port = static_cast<Port>(rng.uniform(w.srcport_min > 1024 ? 1024 : 0, w.srcport_min - 1u));
      r.dst_ip = em.telescope_addr();
      r.dst_port = prep.wave_port[k];
      r.payload_len = static_cast<std::uint32_t>(rng.uniform(w.payload_range.lo, w.payload_range.hi));
      out.push_back(r);
    }
}

void emit_chunk(const Plan& plan, std::size_t ei, std::size_t k, std::vector<AccessRecord>& out) {
  const Day day{plan.spec->date_range.first.value + static_cast<std::int32_t>(k)};
  const auto& e = plan.spec->events[ei];
  if (auto b = std::get_if<Background>(&e))
    emit_background(plan, ei, *b, day, out);
  else if (auto bu = std::get_if<Burst>(&e))
    emit_burst(plan, ei, *bu, k, day, out);
  else if (auto p = std::get_if<CorrelatedPair>(&e))
    emit_pair(plan, ei, *p, k, day, out);
  else if (auto w = std::get_if<UdpWave>(&e))
    emit_wave(plan, ei, *w, k, day, out);
}

std::vector<Label> make_labels(const Plan& plan) {
  const auto& spec = *plan.spec;
  std::vector<Label> labels;
  for (std::size_t ei = 0; ei < spec.events.size(); ++ei) {
    const auto& e = spec.events[ei];
    const auto& prep = plan.prepared[ei];
    if (std::holds_alternative<Background>(e)) continue;
    Label l;
    l.protocol = event_protocol(e);
    Count prev = 0, best_growth = 0;
    bool have_growth = false;
    for (std::size_t k = 0; k < plan.days; ++k) {
      const Count n = prep.daily[k] + prep.shadow_daily[k];
      if (n == 0) {
        prev = 0;
        continue;
      }
      const Day d{spec.date_range.first.value + static_cast<std::int32_t>(k)};
      l.days.push_back(d);
      l.daily_counts.push_back(prep.daily[k]);
      l.records += n;
      if (prep.daily[k] > prev && (!have_growth || prep.daily[k] - prev > best_growth)) {
        best_growth = prep.daily[k] - prev;
        l.peak_growth_day = d;
        have_growth = true;
      }
      prev = prep.daily[k];
      if (std::holds_alternative<CorrelatedPair>(e)) l.shadow_daily_counts.push_back(prep.shadow_daily[k]);
      if (std::holds_alternative<UdpWave>(e)) l.schedule_ports.push_back(prep.wave_port[k]);
    }
    if (l.days.empty()) continue;
    l.onset_day = l.days.front();
    if (auto b = std::get_if<Burst>(&e)) {
      l.type = "burst";
      l.ports = {b->port};
      l.planted_fraction = b->isn_fingerprint_fraction;
      l.planted_matches = planted_total(l.records, to_ppm(b->isn_fingerprint_fraction));
    } else if (auto p = std::get_if<CorrelatedPair>(&e)) {
      l.type = "correlated_pair";
      l.ports = {p->primary_port, p->shadow_port};
      l.planted_fraction = p->volume_ratio;
    } else if (auto w = std::get_if<UdpWave>(&e)) {
      l.type = "udp_wave";
      for (auto port : l.schedule_ports)
        if (std::find(l.ports.begin(), l.ports.end(), port) == l.ports.end()) l.ports.push_back(port);
      l.planted_fraction = w->high_srcport_fraction;
      l.planted_matches = planted_total(l.records, to_ppm(w->high_srcport_fraction));
    }
    labels.push_back(std::move(l));
  }
  return labels;
}

Scenario merge(const Plan& plan, std::vector<std::vector<AccessRecord>>& chunks) {
  Scenario s;
  std::size_t total = 0;
  for (const auto& c : chunks) total += c.size();
  s.records.reserve(total);
  for (auto& c : chunks) {
    s.records.insert(s.records.end(), c.begin(), c.end());
    std::vector<AccessRecord>().swap(c);
  }
  std::stable_sort(s.records.begin(), s.records.end(),
                   [](const AccessRecord& a, const AccessRecord& b) { return a.timestamp < b.timestamp; });
  s.labels = make_labels(plan);
  return s;
}

}  // namespace

Scenario generate(const ScenarioSpec& spec) {
  const Plan plan = prepare(spec);
  const auto n_tasks = static_cast<std::int64_t>(spec.events.size() * plan.days);
  std::vector<std::vector<AccessRecord>> chunks(static_cast<std::size_t>(n_tasks));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < n_tasks; ++t) {
    const auto ei = static_cast<std::size_t>(t) / plan.days;
    const auto k = static_cast<std::size_t>(t) % plan.days;
    emit_chunk(plan, ei, k, chunks[static_cast<std::size_t>(t)]);
  }
  return merge(plan, chunks);
}

namespace reference {

Scenario generate(const ScenarioSpec& spec) {
  const Plan plan = prepare(spec);
  std::vector<std::vector<AccessRecord>> chunks(spec.events.size() * plan.days);
  for (std::size_t t = 0; t < chunks.size(); ++t) emit_chunk(plan, t / plan.days, t % plan.days, chunks[t]);
  return merge(plan, chunks);
}

}  // namespace reference

ScenarioSpec paper_scenario(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.seed = seed;
  spec.date_range = {Day::parse("2020-07-01"), Day::parse("2020-09-30")};

  Background tcp;
  tcp.protocol = Protocol::Tcp;
  tcp.popular_port_bias = {{445, 0.101}, {23, 0.071}, {1433, 0.026}, {22, 0.022}, {21, 0.019},
                           {80, 0.015},  {1723, 0.010}, {5555, 0.009}, {81, 0.008}, {8080, 0.008}};
  spec.events.emplace_back(tcp);

  Background udp;
  udp.protocol = Protocol::Udp;
  udp.popular_port_bias = {{53, 0.2}, {123, 0.15}, {1900, 0.1}, {5060, 0.1}, {161, 0.05}};
  udp.ports_per_day = 8;
  udp.daily_count_range = {10, 40};
  udp.scan_noise_per_day = 150;
  udp.minor_ports = 0;
  spec.events.emplace_back(udp);

  Burst burst;
  burst.port = 9530;
  burst.start_day = Day::parse("2020-07-30");
  burst.ramp_days = 4;
  burst.plateau_days = 7;
  burst.peak_daily_count = 5000;
  burst.decay_days = 25;
  burst.isn_fingerprint_fraction = 0.95;
  spec.events.emplace_back(burst);

  CorrelatedPair pair;
  pair.primary_port = 8291;
  pair.shadow_port = 8728;
  pair.volume_ratio = 0.5;
  pair.start = Day::parse("2020-09-08");
  pair.end = Day::parse("2020-10-05");
  pair.peak_daily_count = 190;
  pair.ramp_days = 3;
  spec.events.emplace_back(pair);

  UdpWave wave;
  const Port ports[] = {58246, 51455, 60129, 53390, 57023};
  Day d = Day::parse("2020-08-01");
  for (auto p : ports) {
    wave.port_schedule.emplace_back(d, p);
    d = d.next();
  }
  wave.daily_count = 30000;
  spec.events.emplace_back(wave);
  return spec;
}

// ---- JSON -----------------------------------------------------------------

namespace {

using ojson = nlohmann::ordered_json;

ojson range_json(const CountRange& r) { return ojson::array({r.lo, r.hi}); }
CountRange range_from(const nlohmann::json& j) { return {j.at(0).get<Count>(), j.at(1).get<Count>()}; }

ojson event_json(const Event& e) {
  ojson j;
  if (auto b = std::get_if<Background>(&e)) {
    j["type"] = "background";
    j["protocol"] = to_string(b->protocol);
    auto bias = ojson::array();
    for (auto [port, r] : b->popular_port_bias) bias.push_back({port, r});
    j["popular_port_bias"] = bias;
    j["ports_per_day"] = b->ports_per_day;
    j["daily_count_range"] = range_json(b->daily_count_range);
    j["scan_noise_per_day"] = b->scan_noise_per_day;
    j["minor_ports"] = b->minor_ports;
    j["minor_baseline_range"] = range_json(b->minor_baseline_range);
    j["minor_presence"] = b->minor_presence;
    j["minor_spike_range"] = range_json(b->minor_spike_range);
  } else if (auto bu = std::get_if<Burst>(&e)) {
    j["type"] = "burst";
    j["port"] = bu->port;
    j["start_day"] = bu->start_day.to_string();
    j["ramp_days"] = bu->ramp_days;
    j["plateau_days"] = bu->plateau_days;
    j["peak_daily_count"] = bu->peak_daily_count;
    j["decay_days"] = bu->decay_days;
    j["isn_fingerprint_fraction"] = bu->isn_fingerprint_fraction;
  } else if (auto p = std::get_if<CorrelatedPair>(&e)) {
    j["type"] = "correlated_pair";
    j["primary_port"] = p->primary_port;
    j["shadow_port"] = p->shadow_port;
    j["volume_ratio"] = p->volume_ratio;
    j["start"] = p->start.to_string();
    j["end"] = p->end.to_string();
    j["peak_daily_count"] = p->peak_daily_count;
    j["ramp_days"] = p->ramp_days;
  } else if (auto w = std::get_if<UdpWave>(&e)) {
    j["type"] = "udp_wave";
    auto sched = ojson::array();
    for (auto [d, port] : w->port_schedule) sched.push_back({d.to_string(), port});
    j["port_schedule"] = sched;
    j["daily_count"] = w->daily_count;
    j["hourly_profile"] = w->hourly_profile;
    j["payload_range"] = range_json(w->payload_range);
    j["srcport_min"] = w->srcport_min;
    j["high_srcport_fraction"] = w->high_srcport_fraction;
    j["spoofed_sources"] = w->spoofed_sources;
  }
  return j;
}

Port port_from(const nlohmann::json& j) {
  const auto v = j.get<std::int64_t>();
  if (v < 0 || v > 65535) throw invalid("port " + std::to_string(v) + " outside 0-65535");
  return static_cast<Port>(v);
}

Event event_from(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "background") {
    Background b;
    b.protocol = parse_protocol(j.value("protocol", std::string("tcp")));
    if (j.contains("popular_port_bias")) {
      b.popular_port_bias.clear();
      for (const auto& p : j["popular_port_bias"]) b.popular_port_bias.emplace_back(port_from(p.at(0)), p.at(1).get<double>());
    }
    b.ports_per_day = j.value("ports_per_day", b.ports_per_day);
    if (j.contains("daily_count_range")) b.daily_count_range = range_from(j["daily_count_range"]);
    b.scan_noise_per_day = j.value("scan_noise_per_day", b.scan_noise_per_day);
    b.minor_ports = j.value("minor_ports", b.minor_ports);
    if (j.contains("minor_baseline_range")) b.minor_baseline_range = range_from(j["minor_baseline_range"]);
    b.minor_presence = j.value("minor_presence", b.minor_presence);
    if (j.contains("minor_spike_range")) b.minor_spike_range = range_from(j["minor_spike_range"]);
    return b;
  }
  if (type == "burst") {
    Burst b;
    b.port = port_from(j.at("port"));
    b.start_day = Day::parse(j.at("start_day").get<std::string>());
    b.ramp_days = j.value("ramp_days", b.ramp_days);
    b.plateau_days = j.value("plateau_days", b.plateau_days);
    b.peak_daily_count = j.at("peak_daily_count").get<Count>();
    b.decay_days = j.value("decay_days", b.decay_days);
    b.isn_fingerprint_fraction = j.value("isn_fingerprint_fraction", b.isn_fingerprint_fraction);
    return b;
  }
  if (type == "correlated_pair") {
    CorrelatedPair p;
    p.primary_port = port_from(j.at("primary_port"));
    p.shadow_port = port_from(j.at("shadow_port"));
    p.volume_ratio = j.value("volume_ratio", p.volume_ratio);
    p.start = Day::parse(j.at("start").get<std::string>());
    p.end = Day::parse(j.at("end").get<std::string>());
    p.peak_daily_count = j.at("peak_daily_count").get<Count>();
    p.ramp_days = j.value("ramp_days", p.ramp_days);
    return p;
  }
  if (type == "udp_wave") {
    UdpWave w;
    for (const auto& s : j.at("port_schedule")) w.port_schedule.emplace_back(Day::parse(s.at(0).get<std::string>()), port_from(s.at(1)));
    w.daily_count = j.at("daily_count").get<Count>();
    if (j.contains("hourly_profile")) {
      const auto& hp = j["hourly_profile"];
      if (!hp.is_array() || hp.size() != 24) throw invalid("hourly_profile needs 24 weights");
      for (std::size_t h = 0; h < 24; ++h) w.hourly_profile[h] = hp[h].get<double>();
    }
    if (j.contains("payload_range")) w.payload_range = range_from(j["payload_range"]);
    if (j.contains("srcport_min")) w.srcport_min = port_from(j["srcport_min"]);
    w.high_srcport_fraction = j.value("high_srcport_fraction", w.high_srcport_fraction);
    w.spoofed_sources = j.value("spoofed_sources", w.spoofed_sources);
    return w;
  }
  throw invalid("unknown event type '" + type + "'");
}

}  // namespace

std::string scenario_to_json(const ScenarioSpec& spec) {
  ojson j;
  j["seed"] = spec.seed;
  j["start"] = spec.date_range.first.to_string();
  j["end"] = spec.date_range.last.to_string();
  j["telescope"] = spec.telescope_prefix.to_string() + "/" + std::to_string(spec.telescope_prefix_len);
  auto events = ojson::array();
  for (const auto& e : spec.events) events.push_back(event_json(e));
  j["events"] = std::move(events);
  return j.dump(1) + "\n";
}

ScenarioSpec scenario_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw invalid("scenario is not a JSON object");
  try {
    ScenarioSpec spec;
    spec.seed = j.value("seed", spec.seed);
    spec.date_range = {Day::parse(j.at("start").get<std::string>()), Day::parse(j.at("end").get<std::string>())};
    if (j.contains("telescope")) {
      const auto t = j["telescope"].get<std::string>();
      const auto slash = t.find('/');
      if (slash == std::string::npos) throw invalid("telescope must be a.b.c.d/len");
      spec.telescope_prefix = Ipv4::parse(t.substr(0, slash));
      spec.telescope_prefix_len = std::stoi(t.substr(slash + 1));
    }
    for (const auto& e : j.at("events")) spec.events.push_back(event_from(e));
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw invalid(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw invalid("scenario: bad telescope prefix length");
  }
}

std::string labels_to_json(const std::vector<Label>& labels) {
  auto arr = ojson::array();
  for (const auto& l : labels) {
    ojson j;
    j["type"] = l.type;
    j["protocol"] = to_string(l.protocol);
    j["port"] = l.ports.front();
    if (l.type == "correlated_pair") j["shadow_port"] = l.ports[1];
    if (l.type == "udp_wave") j["ports"] = l.ports;
    auto days = ojson::array();
    for (auto d : l.days) days.push_back(d.to_string());
    j["days"] = std::move(days);
    j["daily_counts"] = l.daily_counts;
    if (!l.shadow_daily_counts.empty()) j["shadow_daily_counts"] = l.shadow_daily_counts;
    if (!l.schedule_ports.empty()) j["schedule"] = l.schedule_ports;
    j["onset_day"] = l.onset_day.to_string();
    if (l.type == "burst") {
      j["peak_growth_day"] = l.peak_growth_day.to_string();
      j["isn_fingerprint_fraction"] = l.planted_fraction;
      j["isn_fingerprinted"] = l.planted_matches;
    } else if (l.type == "correlated_pair") {
      j["volume_ratio"] = l.planted_fraction;
    } else if (l.type == "udp_wave") {
      j["high_srcport_fraction"] = l.planted_fraction;
      j["high_srcport_records"] = l.planted_matches;
    }
    j["records"] = l.records;
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::string records_to_ndjson(const std::vector<AccessRecord>& records) {
  std::string out;
  out.reserve(records.size() * 120);
  for (const auto& r : records) append_ndjson(out, r);
  return out;
}

}  // namespace porttfidf::synth
