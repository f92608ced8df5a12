#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace ember {

/// Dispatch categories of the fire/rescue event feed.
enum class EventType : std::uint8_t { FR, MD, AL, CA, TA, RC, OF, VF, HZ, TM, CM, XX };

inline constexpr std::array<EventType, 12> kAllEventTypes = {
    EventType::FR, EventType::MD, EventType::AL, EventType::CA, EventType::TA, EventType::RC,
    EventType::OF, EventType::VF, EventType::HZ, EventType::TM, EventType::CM, EventType::XX};

/// The six types modelled by default: fire, medical, alarms, citizen assist,
/// motor vehicle incident, rescue.
inline constexpr std::array<EventType, 6> kCoreEventTypes = {
    EventType::FR, EventType::MD, EventType::AL, EventType::CA, EventType::TA, EventType::RC};

std::string_view to_string(EventType t) noexcept;
std::string_view describe(EventType t) noexcept;
std::optional<EventType> parse_event_type(std::string_view code) noexcept;

/// Comma-separated codes, e.g. "FR,MD". Throws Error(unknown_event_type).
std::vector<EventType> parse_event_type_list(std::string_view text);

}  // namespace ember
