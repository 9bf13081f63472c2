#include "vppfra/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace vppfra::log {

namespace {

Level parse_env() {
  const char* v = std::getenv("VPP_FRA_LOG");
  if (!v) return Level::Warn;
  std::string s(v);
  if (s == "error") return Level::Error;
  if (s == "warn") return Level::Warn;
  if (s == "info") return Level::Info;
  if (s == "debug") return Level::Debug;
  return Level::Warn;
}

Level g_threshold = parse_env();
std::mutex g_mutex;

const char* tag(Level lv) {
  switch (lv) {
    case Level::Error: return "error";
    case Level::Warn: return "warn";
    case Level::Info: return "info";
    case Level::Debug: return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() { return g_threshold; }
void set_threshold(Level lv) { g_threshold = lv; }
bool enabled(Level lv) { return static_cast<int>(lv) <= static_cast<int>(g_threshold); }

void emit(Level lv, const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[vpp-fra " << tag(lv) << "] " << msg << "\n";
}

}  // namespace vppfra::log
