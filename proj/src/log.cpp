#include "aic/log.hpp"

#include "aic/error.hpp"

#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>
#include <string>

namespace aic::log {

namespace {

std::atomic<Level> g_level{Level::kInfo};
std::mutex g_mutex;

const char* name_of(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    case Level::kOff: return "off";
  }
  return "?";
}

}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

Level parse_level(std::string_view text) {
  for (Level l : {Level::kDebug, Level::kInfo, Level::kWarn, Level::kError, Level::kOff}) {
    if (text == name_of(l)) return l;
  }
  throw InvalidArgument("unknown log level '" + std::string(text) + "'");
}

void event(Level lvl, std::string_view name, nlohmann::json fields) {
  if (lvl < g_level.load() || lvl == Level::kOff) return;
  nlohmann::json line = nlohmann::json::object();
  line["ts"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
                   .count();
  line["level"] = name_of(lvl);
  line["event"] = std::string(name);
  if (fields.is_object()) {
    for (auto& [k, v] : fields.items()) line[k] = v;
  }
  const std::string text = line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  std::lock_guard lock(g_mutex);
  std::cerr << text << '\n';
}

}  // namespace aic::log
