#pragma once

#include <iostream>
#include <sstream>

namespace fsreal {

// Verbosity from the FSREAL_LOG environment variable:
// "error" (default), "info", or "debug".
enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level();

}  // namespace fsreal

#define FSREAL_LOG_AT(level, expr)                                             \
    do {                                                                       \
        if (static_cast<int>(::fsreal::log_level()) >= static_cast<int>(level)) { \
            std::ostringstream fsreal_log_oss;                                 \
            fsreal_log_oss << expr;                                            \
            std::cerr << fsreal_log_oss.str() << "\n";                         \
        }                                                                      \
    } while (0)

#define FSREAL_LOG_ERROR(expr) FSREAL_LOG_AT(::fsreal::LogLevel::kError, expr)
#define FSREAL_LOG_INFO(expr) FSREAL_LOG_AT(::fsreal::LogLevel::kInfo, expr)
#define FSREAL_LOG_DEBUG(expr) FSREAL_LOG_AT(::fsreal::LogLevel::kDebug, expr)
