#include "ember/event_type.hpp"

#include <string>

#include "ember/error.hpp"

namespace ember {

std::string_view to_string(EventType t) noexcept {
  switch (t) {
    case EventType::FR: return "FR";
    case EventType::MD: return "MD";
    case EventType::AL: return "AL";
    case EventType::CA: return "CA";
    case EventType::TA: return "TA";
    case EventType::RC: return "RC";
    case EventType::OF: return "OF";
    case EventType::VF: return "VF";
    case EventType::HZ: return "HZ";
    case EventType::TM: return "TM";
    case EventType::CM: return "CM";
    case EventType::XX: return "XX";
  }
  return "??";
}

std::string_view describe(EventType t) noexcept {
  switch (t) {
    case EventType::FR: return "Fire";
    case EventType::MD: return "Medical";
    case EventType::AL: return "Alarms";
    case EventType::CA: return "Citizen assist";
    case EventType::TA: return "Motor vehicle incident";
    case EventType::RC: return "Rescue";
    case EventType::OF: return "Outside fire";
    case EventType::VF: return "Vehicle fire";
    case EventType::HZ: return "Hazardous materials";
    case EventType::TM: return "Training/maintenance";
    case EventType::CM: return "Community";
    case EventType::XX: return "Others";
  }
  return "?";
}

std::optional<EventType> parse_event_type(std::string_view code) noexcept {
  while (!code.empty() && code.front() == ' ') code.remove_prefix(1);
  while (!code.empty() && code.back() == ' ') code.remove_suffix(1);
  for (auto t : kAllEventTypes)
    if (to_string(t) == code) return t;
  return std::nullopt;
}

std::vector<EventType> parse_event_type_list(std::string_view text) {
  std::vector<EventType> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view tok =
        text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (!tok.empty()) {
      auto t = parse_event_type(tok);
      if (!t) throw Error(Errc::unknown_event_type, "unknown event type '" + std::string(tok) + "'");
      bool seen = false;
      for (auto e : out) seen = seen || e == *t;
      if (!seen) out.push_back(*t);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace ember
