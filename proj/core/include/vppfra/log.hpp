#pragma once

#include <sstream>
#include <string>

namespace vppfra::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Threshold comes from VPP_FRA_LOG={error,warn,info,debug}; default "warn".
Level threshold();
void set_threshold(Level lv);
bool enabled(Level lv);
void emit(Level lv, const std::string& msg);

namespace detail {
inline void pack(std::ostringstream&) {}
template <class T, class... Rest>
void pack(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  pack(os, rest...);
}
}  // namespace detail

template <class... Args>
void line(Level lv, const Args&... args) {
  if (!enabled(lv)) return;
  std::ostringstream os;
  detail::pack(os, args...);
  emit(lv, os.str());
}

template <class... Args>
void error(const Args&... a) {
  line(Level::Error, a...);
}
template <class... Args>
void warn(const Args&... a) {
  line(Level::Warn, a...);
}
template <class... Args>
void info(const Args&... a) {
  line(Level::Info, a...);
}
template <class... Args>
void debug(const Args&... a) {
  line(Level::Debug, a...);
}

}  // namespace vppfra::log
