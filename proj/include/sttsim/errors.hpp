#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sttsim {

// Invalid physical/model parameter (domain violations, bad geometry, ...).
class InvalidParameter : public std::invalid_argument {
public:
    explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

// Errors raised while loading or validating a run configuration.
// `path` is the dotted field path ("cell.delta") when known.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, std::string path = {})
        : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Malformed trace input. Carries the 1-based line number of the offending
// record (0 when not line-addressable).
class TraceError : public std::runtime_error {
public:
    TraceError(const std::string& what, std::uint64_t line)
        : std::runtime_error(what), line_(line) {}
    std::uint64_t line() const { return line_; }

private:
    std::uint64_t line_;
};

} // namespace sttsim
