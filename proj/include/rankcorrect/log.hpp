#pragma once

// Minimal stderr logger. Verbosity comes from the RANKCORRECT_LOG
// environment variable: quiet | error | warn | info | debug (default info).

#include <string>

namespace rankcorrect::log {

enum class Level { kQuiet = 0, kError = 1, kWarn = 2, kInfo = 3, kDebug = 4 };

Level threshold();

void error(const std::string& msg);
void warn(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace rankcorrect::log
