#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace vatd {

// Flat key=value experiment configuration with dotted section keys
// (train.lr=0.002). Values stay strings until read; serialization is sorted
// and stable so the hash identifies a run.
class Config {
public:
    static Config from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, const char* value);  // otherwise bool wins
    void set(const std::string& key, double value);
    void set(const std::string& key, int value);
    void set(const std::string& key, uint64_t value);
    void set(const std::string& key, bool value);
    void merge(const Config& other);  // other wins

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    std::string serialize() const;
    std::string hash() const;  // 16 hex chars over serialize()
    const std::map<std::string, std::string>& entries() const {
        return entries_;
    }

private:
    std::map<std::string, std::string> entries_;

    const std::string& raw(const std::string& key) const;
};

std::string format_double(double v);

}  // namespace vatd
