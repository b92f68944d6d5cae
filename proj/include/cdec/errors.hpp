#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cdec {

// Bad shapes, out-of-range parameters, violated preconditions.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed on-disk data. `offset` is the byte position where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

// A NaN/Inf appeared. `index` is the iteration, layer, continuation step or
// epoch at which it was detected, depending on the raising component.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t index)
        : std::runtime_error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration file / override problems. `line` is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace cdec
