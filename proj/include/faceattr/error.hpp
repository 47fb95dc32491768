#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace faceattr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor extents or dimensions that do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An argument outside its documented domain (rate >= 1, top_k <= 0, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Malformed input text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Unreadable, missing or corrupt file. The message always carries the path.
class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace faceattr
