#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lmd {

using DayIndex = std::int64_t;
using SystemId = std::string;

enum class LogonType { network, interactive, other };

std::string_view to_string(LogonType type);
// Accepts the names above and Windows numeric logon types (3 = network,
// 2/10/11 = interactive). Anything else maps to `other`.
LogonType parse_logon_type(std::string_view text);

// One successful authentication: `user` logged in from `source` to
// `destination` at `timestamp` (UTC epoch seconds).
struct AuthEvent {
  std::int64_t timestamp = 0;
  std::string user;
  SystemId source;
  SystemId destination;
  std::optional<int> event_code;
  std::optional<LogonType> logon_type;

  bool operator==(const AuthEvent&) const = default;
};

struct IngestConfig {
  std::set<int> accepted_event_codes{4624};
  std::set<SystemId> domain_controllers;
  std::chrono::seconds day_boundary_offset{0};
  bool drop_self_loops = true;

  // Throws std::invalid_argument when |day_boundary_offset| >= 24h.
  void validate() const;
};

struct ParseResult {
  std::vector<AuthEvent> events;
  std::size_t skipped = 0;
};

// Parses header-bearing comma-separated text with required columns
// timestamp,user,source,destination and optional event_code,logon_type.
// Malformed rows are skipped and counted. A stream without a usable header
// raises UnreadableInputError.
ParseResult parse_events(std::istream& in, const IngestConfig& config = {});
ParseResult parse_events_file(const std::filesystem::path& path,
                              const IngestConfig& config = {});

// Writes events in the same format parse_events reads (round-trip exact).
void write_events(std::ostream& out, std::span<const AuthEvent> events);

std::vector<AuthEvent> filter_events(std::span<const AuthEvent> events,
                                     const IngestConfig& config);

// ISO-8601 with zone ("2021-03-04T05:06:07Z", "+02:00" offsets, optional
// fractional seconds which are truncated) or integer epoch seconds.
std::optional<std::int64_t> parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t epoch_seconds);

DayIndex day_of(std::int64_t epoch_seconds, const IngestConfig& config);

}  // namespace lmd
