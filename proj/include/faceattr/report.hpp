#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace faceattr {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
/// Throws IoError if the file cannot be read.
std::string sha256_file(const std::string& path);
/// Digest over the listed files in order, each contributing its id and
/// content digest.
std::string sha256_files(const std::string& root, std::span<const std::string> ids);

struct InputDigest {
    std::string role;
    std::string path;
    std::string sha256;
};

/// Comment block prefixed to every report file. Two runs with equal headers
/// must produce equal bodies, so nothing time- or host-dependent goes here.
struct ReportHeader {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    std::uint64_t seed = 0;
    std::vector<InputDigest> inputs;

    std::string render() const;
};

/// Collects output files and writes them together. If any write fails,
/// files already written by this writer are removed before rethrowing.
class OutputWriter {
public:
    explicit OutputWriter(std::string directory);

    void add_text(const std::string& name, std::string content);
    /// `write` receives the final path.
    void add_file(const std::string& name, std::function<void(const std::string&)> write);

    /// Returns the written paths in order.
    std::vector<std::string> commit();

    const std::string& directory() const { return directory_; }

private:
    std::string directory_;
    std::vector<std::pair<std::string, std::function<void(const std::string&)>>> pending_;
};

} // namespace faceattr
