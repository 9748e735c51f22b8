#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace porttfidf {

using Port = std::uint16_t;
using Count = std::uint64_t;

enum class Protocol : std::uint8_t { Tcp, Udp };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view s);

/// Error kinds raised by the library. The CLI maps them to exit codes.
enum class Errc {
  MalformedRecord,
  FieldOutOfRange,
  UnsupportedProtocol,
  EmptyInput,
  EmptyCorpus,
  NoSurvivingPorts,
  EmptyDocument,
  InsufficientHistory,
  RangeOutOfCorpus,
  NoSamples,
  EmptyRange,
  BlockOutOfRange,
  InvalidSpec,
  InvalidArgument,
  Io,
};

std::string_view to_string(Errc e);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// A UTC calendar date, stored as days since 1970-01-01.
struct Day {
  std::int32_t value = 0;

  constexpr auto operator<=>(const Day&) const = default;

  constexpr Day next() const { return Day{value + 1}; }
  constexpr Day prev() const { return Day{value - 1}; }

  static constexpr Day from_epoch_seconds(std::int64_t ts) {
    // floor division so pre-epoch timestamps land on the right day
    std::int64_t d = ts / 86400;
    if (ts % 86400 < 0) --d;
    return Day{static_cast<std::int32_t>(d)};
  }
  constexpr std::int64_t epoch_seconds() const { return std::int64_t{value} * 86400; }

  /// "YYYY-MM-DD"
  std::string to_string() const;
  static Day parse(std::string_view iso);
};

constexpr int hour_of(std::int64_t ts) {
  std::int64_t s = ts % 86400;
  if (s < 0) s += 86400;
  return static_cast<int>(s / 3600);
}

/// Inclusive range of UTC days.
struct DateRange {
  Day first;
  Day last;

  bool contains(Day d) const { return first <= d && d <= last; }
  std::int32_t length() const { return last.value - first.value + 1; }
  bool operator==(const DateRange&) const = default;
};

struct Ipv4 {
  /// Numeric value with the first octet in the most significant byte.
  std::uint32_t value = 0;

  constexpr auto operator<=>(const Ipv4&) const = default;
  constexpr std::uint8_t first_octet() const { return static_cast<std::uint8_t>(value >> 24); }

  std::string to_string() const;
  static Ipv4 parse(std::string_view dotted);
};

}  // namespace porttfidf
