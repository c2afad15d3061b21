#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

// Verbosity is controlled by the EMSYNTH_LOG environment variable:
// debug, info, warn (default) or error.
namespace emsynth::logging {

enum class Level { debug = 0, info = 1, warn = 2, error = 3 };

inline Level threshold()
{
    static const Level level = [] {
        const char* env = std::getenv("EMSYNTH_LOG");
        if (env == nullptr) {
            return Level::warn;
        }
        const std::string text(env);
        if (text == "debug") return Level::debug;
        if (text == "info") return Level::info;
        if (text == "error") return Level::error;
        return Level::warn;
    }();
    return level;
}

inline void emit(Level level, const char* tag, const std::string& message)
{
    if (static_cast<int>(level) >= static_cast<int>(threshold())) {
        std::cerr << "[" << tag << "] " << message << "\n";
    }
}

inline void debug(const std::string& message) { emit(Level::debug, "debug", message); }
inline void info(const std::string& message) { emit(Level::info, "info", message); }
inline void warn(const std::string& message) { emit(Level::warn, "warn", message); }
inline void error(const std::string& message) { emit(Level::error, "error", message); }

}  // namespace emsynth::logging
