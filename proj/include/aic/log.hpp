#pragma once

// Structured logging: one JSON object per line on stderr.

#include <json.hpp>

#include <string_view>

namespace aic::log {

enum class Level { kDebug, kInfo, kWarn, kError, kOff };

void set_level(Level level);
Level level();
/// Accepts debug, info, warn, error or off.
Level parse_level(std::string_view text);

void event(Level level, std::string_view name, nlohmann::json fields = nlohmann::json::object());

inline void info(std::string_view name, nlohmann::json fields = nlohmann::json::object()) {
  event(Level::kInfo, name, std::move(fields));
}
inline void warn(std::string_view name, nlohmann::json fields = nlohmann::json::object()) {
  event(Level::kWarn, name, std::move(fields));
}
inline void error(std::string_view name, nlohmann::json fields = nlohmann::json::object()) {
  event(Level::kError, name, std::move(fields));
}

}  // namespace aic::log
