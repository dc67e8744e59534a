#pragma once

#include <map>
#include <string>

namespace tdfmatch {

// key=value configuration file: one pair per line, '#' comments. Keys are
// validated by the consumer against its known set.
class Config {
public:
    Config() = default;
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    // Throws naming the first key not in `known` (comma-separated help list
    // comes from the caller's diagnostics).
    void require_known(const std::initializer_list<const char*>& known) const;

private:
    std::map<std::string, std::string> values_;
    std::string path_;
};

}  // namespace tdfmatch
