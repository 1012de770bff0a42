#include "ammi/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ammi/util.hpp"

namespace ammi {

namespace {
std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
}  // namespace

void Config::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.resize(hash_pos);
        std::string body = trim(line);
        if (body.empty()) continue;
        auto eq = body.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": empty key");
        kv_[key] = value;
    }
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

void Config::set_kv(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::runtime_error("config: --set expects KEY=VALUE, got " + assignment);
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string Config::get_str(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

int Config::get_int(const std::string& key, int def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    try {
        return std::stoi(it->second);
    } catch (...) {
        throw std::runtime_error("config: key " + key + " is not an integer: " + it->second);
    }
}

double Config::get_double(const std::string& key, double def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    try {
        return std::stod(it->second);
    } catch (...) {
        throw std::runtime_error("config: key " + key + " is not a number: " + it->second);
    }
}

uint64_t Config::get_u64(const std::string& key, uint64_t def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    try {
        return std::stoull(it->second);
    } catch (...) {
        throw std::runtime_error("config: key " + key + " is not an integer: " + it->second);
    }
}

bool Config::get_bool(const std::string& key, bool def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::runtime_error("config: key " + key + " is not a boolean: " + v);
}

std::string Config::canonical() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv_) os << k << '=' << v << '\n';
    return os.str();
}

uint64_t Config::hash() const { return fnv1a64(canonical()); }

}  // namespace ammi
