#include "filmrec/core/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace filmrec::log {

namespace {

Level parse_env() {
  const char* v = std::getenv("FILMREC_LOG");
  if (!v) return Level::warn;
  if (std::strcmp(v, "error") == 0) return Level::error;
  if (std::strcmp(v, "warn") == 0) return Level::warn;
  if (std::strcmp(v, "info") == 0) return Level::info;
  if (std::strcmp(v, "debug") == 0) return Level::debug;
  return Level::warn;
}

const char* tag(Level l) {
  switch (l) {
    case Level::error: return "error";
    case Level::warn: return "warn";
    case Level::info: return "info";
    case Level::debug: return "debug";
  }
  return "?";
}

std::mutex g_mutex;

}  // namespace

Level threshold() {
  static const Level level = parse_env();
  return level;
}

void write(Level level, const std::string& message) {
  if (level > threshold()) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "[filmrec %s] %s\n", tag(level), message.c_str());
}

}  // namespace filmrec::log
