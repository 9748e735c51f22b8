#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "porttfidf/types.hpp"

namespace porttfidf {

/// One observed packet arriving at the telescope.
struct AccessRecord {
  std::int64_t timestamp = 0;  // seconds since the Unix epoch, UTC
  Protocol protocol = Protocol::Tcp;
  Ipv4 src_ip;
  Port src_port = 0;
  Ipv4 dst_ip;
  Port dst_port = 0;
  std::uint32_t payload_len = 0;
  std::optional<std::uint32_t> tcp_isn;  // TCP SYN only

  Day day() const { return Day::from_epoch_seconds(timestamp); }
  bool operator==(const AccessRecord&) const = default;
};

enum class RecordFormat { Ndjson, Csv };

RecordFormat parse_record_format(std::string_view s);
/// Guess from a file name: ".csv" is CSV, anything else NDJSON.
RecordFormat record_format_for_path(std::string_view path);

/// Parse and validate a single line. Throws MalformedRecord, FieldOutOfRange
/// or UnsupportedProtocol.
AccessRecord parse_record(std::string_view line, RecordFormat format);

/// Parse a whole buffer, one record per line; blank lines are skipped.
/// Lines are parsed in parallel. Errors name the 1-based line number of the
/// first offending line.
std::vector<AccessRecord> parse_records(std::string_view text, RecordFormat format);

/// Read one or more files (each in `format`) into a single record vector.
std::vector<AccessRecord> read_records(std::span<const std::string> paths, RecordFormat format);

/// Append `r` as one NDJSON line (with trailing newline) to `out`.
void append_ndjson(std::string& out, const AccessRecord& r);
/// Append `r` as one headerless CSV line to `out`.
void append_csv(std::string& out, const AccessRecord& r);

namespace reference {
/// Serial line-by-line parse; same contract as porttfidf::parse_records.
std::vector<AccessRecord> parse_records(std::string_view text, RecordFormat format);
}  // namespace reference

}  // namespace porttfidf
