#include "porttfidf/record.hpp"

#include <omp.h>

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace porttfidf {
namespace {

using nlohmann::json;

Port checked_port(std::int64_t v, std::string_view field) {
  if (v < 0 || v > 65535)
    throw Error(Errc::FieldOutOfRange, std::string(field) + " " + std::to_string(v) + " outside 0-65535");
  return static_cast<Port>(v);
}

std::uint32_t checked_u32(std::int64_t v, std::string_view field) {
  if (v < 0 || v > std::int64_t{std::numeric_limits<std::uint32_t>::max()})
    throw Error(Errc::FieldOutOfRange, std::string(field) + " " + std::to_string(v) + " outside 32-bit unsigned range");
  return static_cast<std::uint32_t>(v);
}

void check_isn_protocol(const AccessRecord& r) {
  if (r.tcp_isn && r.protocol != Protocol::Tcp)
    throw Error(Errc::FieldOutOfRange, "isn present on a udp record");
}

std::int64_t json_int(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(Errc::MalformedRecord, std::string("missing field '") + key + "'");
  if (it->is_number_unsigned()) {
    auto u = it->get<std::uint64_t>();
    if (u > std::uint64_t{std::numeric_limits<std::int64_t>::max()})
      throw Error(Errc::FieldOutOfRange, std::string("field '") + key + "' too large");
    return static_cast<std::int64_t>(u);
  }
  if (!it->is_number_integer()) throw Error(Errc::MalformedRecord, std::string("field '") + key + "' is not an integer");
  return it->get<std::int64_t>();
}

std::string_view json_str(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(Errc::MalformedRecord, std::string("missing field '") + key + "'");
  if (!it->is_string()) throw Error(Errc::MalformedRecord, std::string("field '") + key + "' is not a string");
  return it->get_ref<const std::string&>();
}

AccessRecord parse_ndjson(std::string_view line) {
  json obj = json::parse(line.begin(), line.end(), nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw Error(Errc::MalformedRecord, "not a JSON object");
  AccessRecord r;
  r.protocol = parse_protocol(json_str(obj, "proto"));
  r.timestamp = json_int(obj, "ts");
  r.src_ip = Ipv4::parse(json_str(obj, "src"));
  r.src_port = checked_port(json_int(obj, "sport"), "sport");
  r.dst_ip = Ipv4::parse(json_str(obj, "dst"));
  r.dst_port = checked_port(json_int(obj, "dport"), "dport");
  r.payload_len = checked_u32(json_int(obj, "plen"), "plen");
  if (auto it = obj.find("isn"); it != obj.end() && !it->is_null()) r.tcp_isn = checked_u32(json_int(obj, "isn"), "isn");
  check_isn_protocol(r);
  return r;
}

std::int64_t csv_int(std::string_view s, std::string_view field) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc::result_out_of_range) throw Error(Errc::FieldOutOfRange, std::string(field) + " out of range");
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw Error(Errc::MalformedRecord, std::string(field) + " '" + std::string(s) + "' is not an integer");
  return v;
}

AccessRecord parse_csv(std::string_view line) {
  std::string_view fields[9];
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (n == 9) throw Error(Errc::MalformedRecord, "too many CSV fields");
    fields[n++] = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (n != 7 && n != 8) throw Error(Errc::MalformedRecord, "expected 7 or 8 CSV fields, got " + std::to_string(n));
  AccessRecord r;
  r.protocol = parse_protocol(fields[1]);
  r.timestamp = csv_int(fields[0], "ts");
  r.src_ip = Ipv4::parse(fields[2]);
  r.src_port = checked_port(csv_int(fields[3], "sport"), "sport");
  r.dst_ip = Ipv4::parse(fields[4]);
  r.dst_port = checked_port(csv_int(fields[5], "dport"), "dport");
  r.payload_len = checked_u32(csv_int(fields[6], "plen"), "plen");
  if (n == 8 && !fields[7].empty()) r.tcp_isn = checked_u32(csv_int(fields[7], "isn"), "isn");
  check_isn_protocol(r);
  return r;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

Error at_line(const Error& e, std::size_t line) {
  return Error(e.code(), "line " + std::to_string(line) + ": " + e.what());
}

void append_uint(std::string& out, std::uint64_t v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

void append_int(std::string& out, std::int64_t v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

}  // namespace

RecordFormat parse_record_format(std::string_view s) {
  if (s == "ndjson" || s == "json") return RecordFormat::Ndjson;
  if (s == "csv") return RecordFormat::Csv;
  throw Error(Errc::InvalidArgument, "unknown record format '" + std::string(s) + "'");
}

RecordFormat record_format_for_path(std::string_view path) {
  return path.ends_with(".csv") ? RecordFormat::Csv : RecordFormat::Ndjson;
}

AccessRecord parse_record(std::string_view line, RecordFormat format) {
  line = trim(line);
  if (line.empty()) throw Error(Errc::MalformedRecord, "empty line");
  return format == RecordFormat::Ndjson ? parse_ndjson(line) : parse_csv(line);
}

std::vector<AccessRecord> parse_records(std::string_view text, RecordFormat format) {
  const auto lines = split_lines(text);
  const auto n = static_cast<std::int64_t>(lines.size());
  std::vector<AccessRecord> parsed(lines.size());
  std::vector<char> keep(lines.size(), 0);
  // first failing line wins, independent of thread schedule
  std::int64_t first_bad = n;
  std::optional<Error> first_error;

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    auto line = trim(lines[i]);
    if (line.empty()) continue;
    try {
      parsed[i] = parse_record(line, format);
      keep[i] = 1;
    } catch (const Error& e) {
#pragma omp critical(porttfidf_parse_error)
      if (i < first_bad) {
        first_bad = i;
        first_error = at_line(e, static_cast<std::size_t>(i) + 1);
      }
    }
  }
  if (first_error) throw *first_error;

  std::vector<AccessRecord> out;
  out.reserve(parsed.size());
  for (std::size_t i = 0; i < parsed.size(); ++i)
    if (keep[i]) out.push_back(parsed[i]);
  return out;
}

std::vector<AccessRecord> read_records(std::span<const std::string> paths, RecordFormat format) {
  std::vector<AccessRecord> all;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      auto recs = parse_records(ss.str(), format);
      all.insert(all.end(), recs.begin(), recs.end());
    } catch (const Error& e) {
      throw Error(e.code(), path + ": " + e.what());
    }
  }
  return all;
}

void append_ndjson(std::string& out, const AccessRecord& r) {
  out += "{\"ts\":";
  append_int(out, r.timestamp);
  out += ",\"proto\":\"";
  out += to_string(r.protocol);
  out += "\",\"src\":\"";
  out += r.src_ip.to_string();
  out += "\",\"sport\":";
  append_uint(out, r.src_port);
  out += ",\"dst\":\"";
  out += r.dst_ip.to_string();
  out += "\",\"dport\":";
  append_uint(out, r.dst_port);
  out += ",\"plen\":";
  append_uint(out, r.payload_len);
  if (r.tcp_isn) {
    out += ",\"isn\":";
    append_uint(out, *r.tcp_isn);
  }
  out += "}\n";
}

void append_csv(std::string& out, const AccessRecord& r) {
  append_int(out, r.timestamp);
  out += ',';
  out += to_string(r.protocol);
  out += ',';
  out += r.src_ip.to_string();
  out += ',';
  append_uint(out, r.src_port);
  out += ',';
  out += r.dst_ip.to_string();
  out += ',';
  append_uint(out, r.dst_port);
  out += ',';
  append_uint(out, r.payload_len);
  if (r.tcp_isn) {
    out += ',';
    append_uint(out, *r.tcp_isn);
  }
  out += '\n';
}

namespace reference {

std::vector<AccessRecord> parse_records(std::string_view text, RecordFormat format) {
  std::vector<AccessRecord> out;
  std::size_t lineno = 0;
  for (auto line : split_lines(text)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_record(line, format));
    } catch (const Error& e) {
      throw at_line(e, lineno);
    }
  }
  return out;
}

}  // namespace reference
}  // namespace porttfidf
