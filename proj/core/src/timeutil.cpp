#include "ember/timeutil.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>

#include "ember/error.hpp"

namespace ember {
namespace {

using namespace std::chrono;

std::mutex& tz_env_mutex() {
  static std::mutex m;
  return m;
}

// Caller holds tz_env_mutex.
void activate_zone(const std::string& name) {
  static std::string active;
  if (active == name) return;
  ::setenv("TZ", name.c_str(), 1);
  ::tzset();
  active = name;
}

constexpr long long kHour = 3600;

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

TimeZone TimeZone::utc() {
  static const auto state = [] {
    auto s = std::make_shared<State>();
    s->name = "UTC";
    s->utc = true;
    return s;
  }();
  return TimeZone(state);
}

TimeZone TimeZone::named(const std::string& name) {
  if (name == "UTC" || name == "Etc/UTC" || name == "Z" || name == "GMT") return utc();
  if (name.empty() || name.find("..") != std::string::npos ||
      !std::filesystem::exists(std::filesystem::path("/usr/share/zoneinfo") / name))
    throw Error(Errc::invalid_argument, "unknown time zone '" + name + "'");
  auto s = std::make_shared<State>();
  s->name = name;
  return TimeZone(s);
}

Timestamp TimeZone::to_sys(LocalTime local) const {
  const long long secs = local.time_since_epoch().count();
  if (state_->utc) return Timestamp{seconds{secs}};
  const long long hour = floor_div(secs, kHour);
  {
    std::lock_guard lock(state_->memo_mutex);
    auto it = state_->local_hour_offset.find(hour);
    if (it != state_->local_hour_offset.end()) return Timestamp{seconds{secs - it->second}};
  }
  // Resolve the hour start; offsets only change on hour boundaries for the
  // zones this tool targets.
  const auto days_part = floor<days>(local_seconds{seconds{hour * kHour}});
  const year_month_day ymd{days_part};
  const hh_mm_ss hms{local_seconds{seconds{hour * kHour}} - days_part};
  std::tm tm{};
  tm.tm_year = int(ymd.year()) - 1900;
  tm.tm_mon = int(unsigned(ymd.month())) - 1;
  tm.tm_mday = int(unsigned(ymd.day()));
  tm.tm_hour = int(hms.hours().count());
  tm.tm_isdst = -1;
  long long offset;
  {
    std::lock_guard lock(tz_env_mutex());
    activate_zone(state_->name);
    const std::time_t utc_secs = std::mktime(&tm);
    offset = hour * kHour - static_cast<long long>(utc_secs);
  }
  std::lock_guard lock(state_->memo_mutex);
  state_->local_hour_offset.emplace(hour, offset);
  return Timestamp{seconds{secs - offset}};
}

LocalTime TimeZone::to_local(Timestamp t) const {
  const long long secs = t.time_since_epoch().count();
  if (state_->utc) return LocalTime{seconds{secs}};
  const long long hour = floor_div(secs, kHour);
  {
    std::lock_guard lock(state_->memo_mutex);
    auto it = state_->utc_hour_offset.find(hour);
    if (it != state_->utc_hour_offset.end()) return LocalTime{seconds{secs + it->second}};
  }
  std::time_t tt = static_cast<std::time_t>(hour * kHour);
  std::tm tm{};
  {
    std::lock_guard lock(tz_env_mutex());
    activate_zone(state_->name);
    ::localtime_r(&tt, &tm);
  }
  const long long offset = tm.tm_gmtoff;
  std::lock_guard lock(state_->memo_mutex);
  state_->utc_hour_offset.emplace(hour, offset);
  return LocalTime{seconds{secs + offset}};
}

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc{} && p == s.data() + pos + len;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text, const TimeZone& zone) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);

  int y, mo, d, h = 0, mi = 0, s = 0;
  if (!read_int(text, 0, 4, y) || text.size() < 10 || text[4] != '-' || !read_int(text, 5, 2, mo) ||
      text[7] != '-' || !read_int(text, 8, 2, d))
    return std::nullopt;
  const year_month_day ymd{year{y}, month{unsigned(mo)}, day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 10;
  if (pos < text.size()) {
    if (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ') return std::nullopt;
    ++pos;
    if (text.size() < pos + 5 || !read_int(text, pos, 2, h) || text[pos + 2] != ':' ||
        !read_int(text, pos + 3, 2, mi))
      return std::nullopt;
    pos += 5;
    if (pos < text.size() && text[pos] == ':') {
      if (!read_int(text, pos + 1, 2, s)) return std::nullopt;
      pos += 3;
      if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
        ++pos;
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (pos == start) return std::nullopt;
      }
    }
    if (h > 23 || mi > 59 || s > 60) return std::nullopt;
  }

  const long long civil = (sys_days{ymd}.time_since_epoch().count()) * 86400LL + h * 3600LL + mi * 60LL + s;

  if (pos == text.size()) return zone.to_sys(LocalTime{seconds{civil}});
  if ((text[pos] == 'Z' || text[pos] == 'z') && pos + 1 == text.size())
    return Timestamp{seconds{civil}};
  if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '+' ? 1 : -1;
    int oh, om = 0;
    if (!read_int(text, pos + 1, 2, oh)) return std::nullopt;
    std::size_t q = pos + 3;
    if (q < text.size() && text[q] == ':') ++q;
    if (q < text.size()) {
      if (!read_int(text, q, 2, om)) return std::nullopt;
      q += 2;
    }
    if (q != text.size() || oh > 23 || om > 59) return std::nullopt;
    return Timestamp{seconds{civil - sign * (oh * 3600LL + om * 60LL)}};
  }
  return std::nullopt;
}

std::string format_timestamp(Timestamp t) {
  const auto dp = floor<days>(t);
  const year_month_day ymd{dp};
  const hh_mm_ss hms{t - dp};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lldZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), long(hms.hours().count()),
                long(hms.minutes().count()), static_cast<long long>(hms.seconds().count()));
  return buf;
}

std::string_view to_string(PeriodKind kind) noexcept {
  switch (kind) {
    case PeriodKind::hourly: return "hourly";
    case PeriodKind::daily: return "daily";
    case PeriodKind::weekly: return "weekly";
    case PeriodKind::monthly: return "monthly";
    case PeriodKind::yearly: return "yearly";
  }
  return "?";
}

std::optional<PeriodKind> parse_period_kind(std::string_view text) noexcept {
  for (auto k : {PeriodKind::hourly, PeriodKind::daily, PeriodKind::weekly, PeriodKind::monthly,
                 PeriodKind::yearly})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

LocalTime period_floor(LocalTime t, PeriodKind kind) {
  const auto d = floor<days>(t);
  switch (kind) {
    case PeriodKind::hourly: return floor<hours>(t);
    case PeriodKind::daily: return LocalTime{d};
    case PeriodKind::weekly: {
      // 1970-01-01 was a Thursday; Monday-based weekday index.
      const long long n = d.time_since_epoch().count();
      const long long monday_offset = ((n + 3) % 7 + 7) % 7;
      return LocalTime{local_days{days{n - monday_offset}}};
    }
    case PeriodKind::monthly: {
      const year_month_day ymd{d};
      return LocalTime{local_days{ymd.year() / ymd.month() / 1}};
    }
    case PeriodKind::yearly: {
      const year_month_day ymd{d};
      return LocalTime{local_days{ymd.year() / January / 1}};
    }
  }
  return t;
}

LocalTime period_next(LocalTime start, PeriodKind kind) {
  switch (kind) {
    case PeriodKind::hourly: return start + hours{1};
    case PeriodKind::daily: return start + days{1};
    case PeriodKind::weekly: return start + days{7};
    case PeriodKind::monthly: {
      const year_month_day ymd{floor<days>(start)};
      return LocalTime{local_days{(ymd.year() / ymd.month() / 1) + months{1}}};
    }
    case PeriodKind::yearly: {
      const year_month_day ymd{floor<days>(start)};
      return LocalTime{local_days{(ymd.year() + years{1}) / January / 1}};
    }
  }
  return start;
}

}  // namespace ember
