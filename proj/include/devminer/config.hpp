#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace devminer {

/// Flat TOML subset: `[section]` headers, `key = value` pairs with strings,
/// integers, floats, booleans and single-line string arrays, `#` comments.
/// Keys before the first header live in section "".
class Config {
public:
    using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<std::string>>;

    static Config parse(std::string_view text);
    static Config load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    const Value* find(const std::string& section, const std::string& key) const;

    std::optional<std::string> get_string(const std::string& section, const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& section, const std::string& key) const;
    std::optional<double> get_double(const std::string& section, const std::string& key) const;
    std::optional<bool> get_bool(const std::string& section, const std::string& key) const;
    std::optional<std::vector<std::string>> get_strings(const std::string& section, const std::string& key) const;

    void set(const std::string& section, const std::string& key, Value value);

private:
    std::map<std::string, std::map<std::string, Value>> tables_;
};

}  // namespace devminer
