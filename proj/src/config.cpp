#include "cdec/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "cdec/errors.hpp"

namespace cdec {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& s) {
    const auto pos = s.find_first_of("#;");
    return pos == std::string::npos ? s : s.substr(0, pos);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

std::string where(const KeyValueConfig::Entry& e, const std::string& key) {
    return e.line ? "'" + key + "' (line " + std::to_string(e.line) + ")" : "'" + key + "'";
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string raw, section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (line_no == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section)) throw ConfigError("invalid section name '" + section + "'", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + line + "'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_name(key)) throw ConfigError("invalid key '" + key + "'", line_no);
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(full))
            throw ConfigError("duplicate key '" + full + "' (first set on line " +
                                  std::to_string(cfg.entries_[full].line) + ")",
                              line_no);
        cfg.entries_[full] = {value, line_no};
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    try {
        return parse(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void KeyValueConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    const std::string key = trim(assignment.substr(0, eq));
    const auto dot = key.find('.');
    const bool ok = dot == std::string::npos ? valid_name(key)
                                             : valid_name(key.substr(0, dot)) && valid_name(key.substr(dot + 1));
    if (!ok) throw ConfigError("override has an invalid key '" + key + "'");
    set(key, trim(assignment.substr(eq + 1)));
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

const KeyValueConfig::Entry* KeyValueConfig::find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

bool KeyValueConfig::has(const std::string& key) const { return find(key) != nullptr; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(e->value, &used);
        if (used != e->value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where(*e, key) + " must be a number, got '" + e->value + "'", e->line);
    }
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    long long v = 0;
    const char* begin = e->value.data();
    const char* end = begin + e->value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where(*e, key) + " must be an integer, got '" + e->value + "'", e->line);
    return v;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const char* begin = e->value.data();
    const char* end = begin + e->value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where(*e, key) + " must be a non-negative integer, got '" + e->value + "'", e->line);
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes" || e->value == "on") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no" || e->value == "off") return false;
    throw ConfigError(where(*e, key) + " must be a boolean, got '" + e->value + "'", e->line);
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key,
                                                  const std::vector<std::string>& fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::vector<std::string> out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(where(*e, key) + " has an empty list item", e->line);
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError(where(*e, key) + " is an empty list", e->line);
    return out;
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
    for (const auto& [key, entry] : entries_)
        if (!known.count(key)) throw ConfigError("unknown key " + where(entry, key), entry.line);
}

std::string KeyValueConfig::canonical() const {
    std::ostringstream out;
    for (const auto& [key, entry] : entries_)
        if (key.find('.') == std::string::npos) out << key << " = " << entry.value << "\n";
    std::string section;
    for (const auto& [key, entry] : entries_) {
        const auto dot = key.find('.');
        if (dot == std::string::npos) continue;
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            out << "[" << sec << "]\n";
            section = sec;
        }
        out << key.substr(dot + 1) << " = " << entry.value << "\n";
    }
    return out.str();
}

}  // namespace cdec
