#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ammi {

// Flat key-value configuration: "key = value" lines, '#' comments. Keys are
// dotted lowercase identifiers; values stay strings until queried.
class Config {
public:
    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    // "KEY=VALUE" as passed on the command line.
    void set_kv(const std::string& assignment);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_str(const std::string& key, const std::string& def) const;
    int get_int(const std::string& key, int def) const;
    double get_double(const std::string& key, double def) const;
    uint64_t get_u64(const std::string& key, uint64_t def) const;
    bool get_bool(const std::string& key, bool def) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

    // FNV-1a over the canonical serialization (sorted "key=value" lines).
    uint64_t hash() const;
    std::string canonical() const;

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace ammi
