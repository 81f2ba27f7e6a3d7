#include "lmd/ingest.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "lmd/errors.hpp"

namespace lmd {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Splits one CSV line. Double-quoted fields may contain commas; "" is an
// escaped quote. Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::string(trim(cur)));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::string(trim(cur)));
  return fields;
}

std::string quote_if_needed(std::string_view s) {
  if (s.find_first_of(",\"") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

template <typename T>
std::optional<T> parse_int(std::string_view s) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<int> fixed_digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

struct Columns {
  int timestamp = -1, user = -1, source = -1, destination = -1;
  int event_code = -1, logon_type = -1;
  std::size_t count = 0;
};

}  // namespace

std::string_view to_string(LogonType type) {
  switch (type) {
    case LogonType::network: return "network";
    case LogonType::interactive: return "interactive";
    case LogonType::other: return "other";
  }
  return "other";
}

LogonType parse_logon_type(std::string_view text) {
  if (text == "network" || text == "3") return LogonType::network;
  if (text == "interactive" || text == "2" || text == "10" || text == "11")
    return LogonType::interactive;
  return LogonType::other;
}

void IngestConfig::validate() const {
  if (std::chrono::abs(day_boundary_offset) >= std::chrono::hours(24))
    throw std::invalid_argument("day_boundary_offset must be within (-24h, 24h)");
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (auto epoch = parse_int<std::int64_t>(text)) return epoch;

  // YYYY-MM-DDTHH:MM:SS
  auto year = fixed_digits(text, 0, 4);
  auto month = fixed_digits(text, 5, 2);
  auto day = fixed_digits(text, 8, 2);
  auto hour = fixed_digits(text, 11, 2);
  auto minute = fixed_digits(text, 14, 2);
  auto second = fixed_digits(text, 17, 2);
  if (!year || !month || !day || !hour || !minute || !second) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':')
    return std::nullopt;
  if (*hour > 23 || *minute > 59 || *second > 60) return std::nullopt;

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{*year},
                           std::chrono::month{static_cast<unsigned>(*month)},
                           std::chrono::day{static_cast<unsigned>(*day)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == start) return std::nullopt;
  }
  if (pos >= text.size()) return std::nullopt;  // zone is required

  std::int64_t offset = 0;
  std::string_view zone = text.substr(pos);
  if (zone == "Z" || zone == "z") {
    offset = 0;
  } else if (zone[0] == '+' || zone[0] == '-') {
    std::optional<int> oh, om;
    if (zone.size() == 6 && zone[3] == ':') {
      oh = fixed_digits(zone, 1, 2);
      om = fixed_digits(zone, 4, 2);
    } else if (zone.size() == 5) {
      oh = fixed_digits(zone, 1, 2);
      om = fixed_digits(zone, 3, 2);
    }
    if (!oh || !om || *oh > 23 || *om > 59) return std::nullopt;
    offset = (*oh * 3600 + *om * 60) * (zone[0] == '-' ? -1 : 1);
  } else {
    return std::nullopt;
  }

  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return days * kSecondsPerDay + *hour * 3600 + *minute * 60 + *second - offset;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  std::int64_t days = epoch_seconds / kSecondsPerDay;
  std::int64_t rem = epoch_seconds % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                static_cast<int>(rem % 60));
  return buf;
}

DayIndex day_of(std::int64_t epoch_seconds, const IngestConfig& config) {
  const std::int64_t shifted = epoch_seconds - config.day_boundary_offset.count();
  std::int64_t day = shifted / kSecondsPerDay;
  if (shifted % kSecondsPerDay < 0) --day;
  return day;
}

ParseResult parse_events(std::istream& in, const IngestConfig& config) {
  config.validate();
  if (!in) throw UnreadableInputError("event stream is not readable");

  std::string line;
  if (!std::getline(in, line)) throw UnreadableInputError("event stream is empty (no header)");
  auto header = split_csv(line);
  if (!header) throw UnreadableInputError("malformed header line");

  Columns cols;
  cols.count = header->size();
  std::map<std::string, int*> slots{{"timestamp", &cols.timestamp},
                                    {"user", &cols.user},
                                    {"source", &cols.source},
                                    {"destination", &cols.destination},
                                    {"event_code", &cols.event_code},
                                    {"logon_type", &cols.logon_type}};
  for (std::size_t i = 0; i < header->size(); ++i) {
    auto it = slots.find((*header)[i]);
    if (it != slots.end()) *it->second = static_cast<int>(i);
  }
  if (cols.timestamp < 0 || cols.user < 0 || cols.source < 0 || cols.destination < 0)
    throw UnreadableInputError(
        "header must contain timestamp,user,source,destination columns");

  ParseResult result;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!fields || fields->size() != cols.count) {
      ++result.skipped;
      continue;
    }
    const auto& f = *fields;
    AuthEvent ev;
    auto ts = parse_timestamp(f[cols.timestamp]);
    if (!ts) {
      ++result.skipped;
      continue;
    }
    ev.timestamp = *ts;
    ev.user = f[cols.user];
    ev.source = f[cols.source];
    ev.destination = f[cols.destination];
    if (ev.user.empty() || ev.source.empty() || ev.destination.empty()) {
      ++result.skipped;
      continue;
    }
    if (cols.event_code >= 0 && !f[cols.event_code].empty()) {
      auto code = parse_int<int>(f[cols.event_code]);
      if (!code) {
        ++result.skipped;
        continue;
      }
      ev.event_code = *code;
    }
    if (cols.logon_type >= 0 && !f[cols.logon_type].empty())
      ev.logon_type = parse_logon_type(f[cols.logon_type]);
    result.events.push_back(std::move(ev));
  }
  if (in.bad()) throw UnreadableInputError("I/O error while reading events");
  return result;
}

ParseResult parse_events_file(const std::filesystem::path& path, const IngestConfig& config) {
  std::ifstream in(path);
  if (!in) throw UnreadableInputError("cannot open " + path.string());
  return parse_events(in, config);
}

void write_events(std::ostream& out, std::span<const AuthEvent> events) {
  out << "timestamp,user,source,destination,event_code,logon_type\n";
  for (const auto& ev : events) {
    out << format_timestamp(ev.timestamp) << ',' << quote_if_needed(ev.user) << ','
        << quote_if_needed(ev.source) << ',' << quote_if_needed(ev.destination) << ',';
    if (ev.event_code) out << *ev.event_code;
    out << ',';
    if (ev.logon_type) out << to_string(*ev.logon_type);
    out << '\n';
  }
}

std::vector<AuthEvent> filter_events(std::span<const AuthEvent> events,
                                     const IngestConfig& config) {
  std::vector<AuthEvent> kept;
  kept.reserve(events.size());
  for (const auto& ev : events) {
    if (ev.event_code && !config.accepted_event_codes.contains(*ev.event_code)) continue;
    if (ev.logon_type == LogonType::network &&
        config.domain_controllers.contains(ev.destination))
      continue;
    if (config.drop_self_loops && ev.source == ev.destination) continue;
    kept.push_back(ev);
  }
  return kept;
}

}  // namespace lmd
