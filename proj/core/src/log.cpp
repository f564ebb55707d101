#include "fsreal/log.hpp"

#include <cstdlib>
#include <string>

namespace fsreal {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("FSREAL_LOG");
        if (env == nullptr) return LogLevel::kError;
        const std::string v(env);
        if (v == "debug") return LogLevel::kDebug;
        if (v == "info") return LogLevel::kInfo;
        return LogLevel::kError;
    }();
    return level;
}

}  // namespace fsreal
