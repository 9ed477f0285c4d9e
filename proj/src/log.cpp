#include "gnp/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace gnp {
namespace {
std::atomic<LogLevel> g_level{LogLevel::kWarning};
std::mutex g_mutex;
constexpr const char* kNames[] = {"debug", "info", "warning", "error"};
}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }

void log_message(LogLevel level, std::string_view message) {
  if (level < g_level.load() || level == LogLevel::kOff) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[gnpart " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace gnp
