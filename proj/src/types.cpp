#include "porttfidf/types.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <chrono>
#include <cstdio>

namespace porttfidf {

std::string_view to_string(Protocol p) { return p == Protocol::Tcp ? "tcp" : "udp"; }

Protocol parse_protocol(std::string_view s) {
  if (s == "tcp" || s == "TCP") return Protocol::Tcp;
  if (s == "udp" || s == "UDP") return Protocol::Udp;
  throw Error(Errc::UnsupportedProtocol, "unsupported protocol '" + std::string(s) + "' (only tcp and udp)");
}

std::string_view to_string(Errc e) {
  switch (e) {
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::FieldOutOfRange: return "FieldOutOfRange";
    case Errc::UnsupportedProtocol: return "UnsupportedProtocol";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::NoSurvivingPorts: return "NoSurvivingPorts";
    case Errc::EmptyDocument: return "EmptyDocument";
    case Errc::InsufficientHistory: return "InsufficientHistory";
    case Errc::RangeOutOfCorpus: return "RangeOutOfCorpus";
    case Errc::NoSamples: return "NoSamples";
    case Errc::EmptyRange: return "EmptyRange";
    case Errc::BlockOutOfRange: return "BlockOutOfRange";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

std::string Day::to_string() const {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{value}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Day Day::parse(std::string_view iso) {
  auto bad = [&] { return Error(Errc::InvalidArgument, "bad date '" + std::string(iso) + "', expected YYYY-MM-DD"); };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw bad();
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::string_view s, auto& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || p != s.data() + s.size()) throw bad();
  };
  num(iso.substr(0, 4), y);
  num(iso.substr(5, 2), m);
  num(iso.substr(8, 2), d);
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw bad();
  return Day{static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

std::string Ipv4::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", value >> 24, (value >> 16) & 0xff, (value >> 8) & 0xff,
                value & 0xff);
  return buf;
}

Ipv4 Ipv4::parse(std::string_view dotted) {
  std::string s(dotted);
  in_addr addr{};
  if (inet_pton(AF_INET, s.c_str(), &addr) != 1)
    throw Error(Errc::FieldOutOfRange, "bad IPv4 address '" + s + "'");
  return Ipv4{ntohl(addr.s_addr)};
}

}  // namespace porttfidf
