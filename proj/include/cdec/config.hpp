#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace cdec {

// key=value lines grouped under [section] headers. '#' and ';' start comments.
// Keys are addressed as "section.key"; keys before any header live in "".
class KeyValueConfig {
public:
    struct Entry {
        std::string value;
        std::size_t line = 0;  // 0 for values set by override
    };

    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig parse_string(const std::string& text);
    static KeyValueConfig load(const std::filesystem::path& path);

    // "section.key=value"
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

    // Throws ConfigError naming the first key not in `known`.
    void require_known(const std::set<std::string>& known) const;

    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

    // Canonical text form: sections in order, keys sorted.
    std::string canonical() const;

private:
    const Entry* find(const std::string& key) const;
    std::map<std::string, Entry> entries_;
};

}  // namespace cdec
