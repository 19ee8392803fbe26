#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

// Minimal stderr logging, level selected by the SYSID_LOG environment
// variable: error (default), warn, info, debug.
namespace sysid::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

inline Level level() {
    static Level lv = [] {
        const char* e = std::getenv("SYSID_LOG");
        if (!e) return Level::error;
        if (std::strcmp(e, "debug") == 0) return Level::debug;
        if (std::strcmp(e, "info") == 0) return Level::info;
        if (std::strcmp(e, "warn") == 0) return Level::warn;
        return Level::error;
    }();
    return lv;
}

inline void write(Level lv, const std::string& msg) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (static_cast<int>(lv) <= static_cast<int>(level()))
        std::fprintf(stderr, "[sysid:%s] %s\n", names[static_cast<int>(lv)], msg.c_str());
}

inline void error(const std::string& m) { write(Level::error, m); }
inline void warn(const std::string& m) { write(Level::warn, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void debug(const std::string& m) { write(Level::debug, m); }

}  // namespace sysid::log
