#include "rankcorrect/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace rankcorrect::log {

namespace {

Level parse_level() {
  const char* env = std::getenv("RANKCORRECT_LOG");
  if (env == nullptr) return Level::kInfo;
  if (std::strcmp(env, "quiet") == 0) return Level::kQuiet;
  if (std::strcmp(env, "error") == 0) return Level::kError;
  if (std::strcmp(env, "warn") == 0) return Level::kWarn;
  if (std::strcmp(env, "debug") == 0) return Level::kDebug;
  return Level::kInfo;
}

void emit(Level level, const char* tag, const std::string& msg) {
  if (threshold() >= level) std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

}  // namespace

Level threshold() {
  static const Level level = parse_level();
  return level;
}

void error(const std::string& msg) { emit(Level::kError, "error", msg); }
void warn(const std::string& msg) { emit(Level::kWarn, "warn", msg); }
void info(const std::string& msg) { emit(Level::kInfo, "info", msg); }
void debug(const std::string& msg) { emit(Level::kDebug, "debug", msg); }

}  // namespace rankcorrect::log
