#pragma once

#include <functional>
#include <vector>
#include <string>
#include <string_view>

namespace ember::log {

using Sink = std::function<void(std::string_view)>;

/// Replaces the warning sink (default: stderr) and returns the previous one.
Sink set_warning_sink(Sink sink);

void warn(std::string_view message);

/// Captures warnings for the lifetime of the object; restores the previous
/// sink on destruction.
class ScopedCapture {
 public:
  ScopedCapture();
  ~ScopedCapture();
  ScopedCapture(const ScopedCapture&) = delete;
  ScopedCapture& operator=(const ScopedCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(std::string_view needle) const;

 private:
  std::vector<std::string> messages_;
  Sink previous_;
};

}  // namespace ember::log
