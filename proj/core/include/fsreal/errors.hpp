#pragma once

#include <stdexcept>
#include <string>

namespace fsreal {

// Error taxonomy used across the library. The CLI maps these onto exit
// codes: ConfigError -> 1, verification failures -> 2, everything else -> 3.

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

class CodecError : public std::runtime_error {
public:
    explicit CodecError(const std::string& msg) : std::runtime_error(msg) {}
};

// Frame-level parse failure; carries the offending field and byte offset.
class FramingError : public std::runtime_error {
public:
    FramingError(const std::string& field, size_t offset, const std::string& msg)
        : std::runtime_error("frame error at byte " + std::to_string(offset) +
                             " (" + field + "): " + msg),
          field_(field),
          offset_(offset) {}

    const std::string& field() const { return field_; }
    size_t offset() const { return offset_; }

private:
    std::string field_;
    size_t offset_;
};

class MetricError : public std::runtime_error {
public:
    explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fsreal
