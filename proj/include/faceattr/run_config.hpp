#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace faceattr {

struct ConfigKey {
    const char* name;
    const char* default_value;  ///< "" means unset
    const char* help;
};

/// Every key accepted in a config file or as a `--name` flag.
const std::vector<ConfigKey>& config_keys();

/// Resolved key/value settings. Keys are the hyphenated names from
/// config_keys(); underscores in input are accepted as hyphens.
class RunConfig {
public:
    /// All keys at their defaults.
    RunConfig();

    /// Reads `key = value` lines; '#' starts a comment. Unknown keys and
    /// missing '=' raise ConfigError with the line number.
    void merge_text(std::istream& in, const std::string& origin);
    void merge_file(const std::string& path);

    void set(std::string_view key, std::string value);
    /// Sets `key` only if it still holds its empty default.
    void set_default(std::string_view key, std::string value);

    bool has(std::string_view key) const;  ///< non-empty value
    const std::string& get(std::string_view key) const;
    std::string require_path(std::string_view key) const;

    std::size_t get_size(std::string_view key) const;
    std::uint64_t get_u64(std::string_view key) const;
    double get_real(std::string_view key) const;
    bool get_bool(std::string_view key) const;

    const std::map<std::string, std::string>& values() const { return values_; }

    static std::string normalize(std::string_view key);

private:
    std::map<std::string, std::string> values_;
};

} // namespace faceattr
