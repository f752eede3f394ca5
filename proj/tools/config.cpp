#include "config.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace vatd {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file: " + path);
    }
    Config cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": expected key=value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        if (key.empty()) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": empty key");
        }
        cfg.entries_[key] = trim(stripped.substr(eq + 1));
    }
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}
void Config::set(const std::string& key, const char* value) {
    entries_[key] = value;
}
void Config::set(const std::string& key, double value) {
    entries_[key] = format_double(value);
}
void Config::set(const std::string& key, int value) {
    entries_[key] = std::to_string(value);
}
void Config::set(const std::string& key, uint64_t value) {
    entries_[key] = std::to_string(value);
}
void Config::set(const std::string& key, bool value) {
    entries_[key] = value ? "true" : "false";
}

void Config::merge(const Config& other) {
    for (const auto& [k, v] : other.entries_) {
        entries_[k] = v;
    }
}

bool Config::has(const std::string& key) const {
    return entries_.count(key) != 0;
}

const std::string& Config::raw(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw std::invalid_argument("config: missing key '" + key + "'");
    }
    return it->second;
}

std::string Config::get_string(const std::string& key) const {
    return raw(key);
}

double Config::get_double(const std::string& key) const {
    const std::string& s = raw(key);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("config: key '" + key +
                                    "' is not a number: " + s);
    }
    return v;
}

int Config::get_int(const std::string& key) const {
    const std::string& s = raw(key);
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("config: key '" + key +
                                    "' is not an integer: " + s);
    }
    return v;
}

uint64_t Config::get_u64(const std::string& key) const {
    const std::string& s = raw(key);
    uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("config: key '" + key +
                                    "' is not an unsigned integer: " + s);
    }
    return v;
}

bool Config::get_bool(const std::string& key) const {
    const std::string& s = raw(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("config: key '" + key +
                                "' is not a boolean: " + s);
}

std::string Config::serialize() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::string Config::hash() const {
    const std::string s = serialize();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

}  // namespace vatd
