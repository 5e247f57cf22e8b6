#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

namespace nacabe::log {

enum class Level : int {
  None = 0,
  Error = 1,
  Warn = 2,
  Info = 3,
  Debug = 4,
  Trace = 5,
};

// NACABE_LOG={error,warn,info,debug,trace}
inline Level
threshold()
{
  static Level lvl = [] {
    const char* env = std::getenv("NACABE_LOG");
    if (env == nullptr)
      return Level::None;
    if (std::strcmp(env, "error") == 0)
      return Level::Error;
    if (std::strcmp(env, "warn") == 0)
      return Level::Warn;
    if (std::strcmp(env, "info") == 0)
      return Level::Info;
    if (std::strcmp(env, "debug") == 0)
      return Level::Debug;
    if (std::strcmp(env, "trace") == 0)
      return Level::Trace;
    return Level::None;
  }();
  return lvl;
}

inline bool
enabled(Level lvl)
{
  return static_cast<int>(lvl) <= static_cast<int>(threshold());
}

template<typename... Args>
void
write(Level lvl, const char* tag, Args&&... args)
{
  if (!enabled(lvl))
    return;
  std::ostringstream oss;
  (oss << ... << args);
  std::fprintf(stderr, "[%s] %s\n", tag, oss.str().c_str());
}

template<typename... Args>
void
error(Args&&... args)
{
  write(Level::Error, "E", std::forward<Args>(args)...);
}

template<typename... Args>
void
warn(Args&&... args)
{
  write(Level::Warn, "W", std::forward<Args>(args)...);
}

template<typename... Args>
void
info(Args&&... args)
{
  write(Level::Info, "I", std::forward<Args>(args)...);
}

template<typename... Args>
void
debug(Args&&... args)
{
  write(Level::Debug, "D", std::forward<Args>(args)...);
}

template<typename... Args>
void
trace(Args&&... args)
{
  write(Level::Trace, "T", std::forward<Args>(args)...);
}

} // namespace nacabe::log
