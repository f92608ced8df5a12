#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace ember {

using Timestamp = std::chrono::sys_seconds;
using LocalTime = std::chrono::local_seconds;

/// IANA zone used to interpret timestamps that carry no UTC offset and to
/// place period boundaries on the local civil calendar.
///
/// Conversions go through the C library (TZ + mktime/localtime_r) and are
/// serialized process-wide; offsets are memoized per hour.
class TimeZone {
 public:
  static TimeZone utc();
  /// Throws Error(invalid_argument) when the zone is not in the system tz
  /// database.
  static TimeZone named(const std::string& name);

  const std::string& name() const { return state_->name; }
  bool is_utc() const { return state_->utc; }

  Timestamp to_sys(LocalTime local) const;
  LocalTime to_local(Timestamp t) const;

 private:
  struct State {
    std::string name;
    bool utc = false;
    std::mutex memo_mutex;
    std::map<long long, long long> local_hour_offset;
    std::map<long long, long long> utc_hour_offset;
  };
  explicit TimeZone(std::shared_ptr<State> s) : state_(std::move(s)) {}
  std::shared_ptr<State> state_;
};

/// Parses RFC 3339 style timestamps: `YYYY-MM-DD[T| ]HH:MM[:SS[.fff]][Z|±HH:MM]`
/// or a bare date `YYYY-MM-DD`. Values without an offset are local civil
/// time in `zone`. Fractional seconds are truncated. Returns nullopt for
/// malformed text or impossible calendar dates.
std::optional<Timestamp> parse_timestamp(std::string_view text, const TimeZone& zone);

/// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_timestamp(Timestamp t);

enum class PeriodKind { hourly, daily, weekly, monthly, yearly };

std::string_view to_string(PeriodKind kind) noexcept;
std::optional<PeriodKind> parse_period_kind(std::string_view text) noexcept;

/// Start of the period containing `t`, in local civil time. Weeks start on
/// Monday 00:00.
LocalTime period_floor(LocalTime t, PeriodKind kind);
/// Start of the period following the one that starts at `start`.
LocalTime period_next(LocalTime start, PeriodKind kind);

}  // namespace ember
