#pragma once

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace fv::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Log level comes from the FV_LOG environment variable (error|warn|info|debug).
inline Level threshold() {
    static Level lv = [] {
        const char* e = std::getenv("FV_LOG");
        if (e == nullptr) return Level::warn;
        if (std::strcmp(e, "error") == 0) return Level::error;
        if (std::strcmp(e, "warn") == 0) return Level::warn;
        if (std::strcmp(e, "info") == 0) return Level::info;
        if (std::strcmp(e, "debug") == 0) return Level::debug;
        return Level::warn;
    }();
    return lv;
}

inline void emit(Level lv, const char* tag, const char* fmt, ...) {
    if (lv > threshold()) return;
    std::fprintf(stderr, "[%s] ", tag);
    va_list ap;
    va_start(ap, fmt);
    std::vfprintf(stderr, fmt, ap);
    va_end(ap);
    std::fputc('\n', stderr);
}

} // namespace fv::log

#define FV_ERROR(...) ::fv::log::emit(::fv::log::Level::error, "error", __VA_ARGS__)
#define FV_WARN(...)  ::fv::log::emit(::fv::log::Level::warn,  "warn",  __VA_ARGS__)
#define FV_INFO(...)  ::fv::log::emit(::fv::log::Level::info,  "info",  __VA_ARGS__)
#define FV_DEBUG(...) ::fv::log::emit(::fv::log::Level::debug, "debug", __VA_ARGS__)
