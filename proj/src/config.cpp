#include "devminer/config.hpp"

#include "devminer/error.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace devminer {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

class ValueParser {
public:
    ValueParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

    Config::Value parse_value() {
        skip_ws();
        if (at_end()) fail("missing value");
        const char c = text_[pos_];
        if (c == '"' || c == '\'') return parse_string();
        if (c == '[') return parse_array();
        return parse_scalar();
    }

    void expect_end() {
        skip_ws();
        if (!at_end() && text_[pos_] != '#') fail("unexpected trailing characters");
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_); }
    bool at_end() const { return pos_ >= text_.size(); }
    void skip_ws() {
        while (!at_end() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    std::string parse_string() {
        const char quote = text_[pos_++];
        std::string out;
        while (!at_end() && text_[pos_] != quote) {
            char c = text_[pos_++];
            if (quote == '"' && c == '\\') {
                if (at_end()) fail("dangling escape");
                const char e = text_[pos_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            }
            out.push_back(c);
        }
        if (at_end()) fail("unterminated string");
        ++pos_;
        return out;
    }

    std::vector<std::string> parse_array() {
        ++pos_;
        std::vector<std::string> items;
        for (;;) {
            skip_ws();
            if (at_end()) fail("unterminated array");
            if (text_[pos_] == ']') {
                ++pos_;
                return items;
            }
            if (text_[pos_] != '"' && text_[pos_] != '\'') fail("only string arrays are supported");
            items.push_back(parse_string());
            skip_ws();
            if (!at_end() && text_[pos_] == ',') ++pos_;
        }
    }

    Config::Value parse_scalar() {
        std::size_t end = pos_;
        while (end < text_.size() && text_[end] != '#' && text_[end] != ' ' && text_[end] != '\t') ++end;
        const std::string_view token = text_.substr(pos_, end - pos_);
        pos_ = end;
        if (token == "true") return true;
        if (token == "false") return false;
        std::string cleaned;
        for (char c : token)
            if (c != '_') cleaned.push_back(c);
        const bool is_float = cleaned.find_first_of(".eE") != std::string::npos;
        const char* first = cleaned.data();
        const char* last = cleaned.data() + cleaned.size();
        if (!cleaned.empty() && cleaned.front() == '+') ++first;
        if (is_float) {
            double v = 0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last) fail("invalid number '" + std::string(token) + "'");
            return v;
        }
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) fail("invalid value '" + std::string(token) + "'");
        return v;
    }

    std::string_view text_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

}  // namespace

Config Config::parse(std::string_view text) {
    Config config;
    std::string section;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            const std::size_t close = line.find(']');
            if (close == std::string_view::npos) throw ParseError("unterminated table header", line_no);
            section = std::string(trim(line.substr(1, close - 1)));
            if (section.empty()) throw ParseError("empty table name", line_no);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
        std::string key(trim(line.substr(0, eq)));
        if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
        if (key.empty()) throw ParseError("empty key", line_no);
        ValueParser parser(line.substr(eq + 1), line_no);
        Value value = parser.parse_value();
        parser.expect_end();
        if (!config.tables_[section].emplace(key, std::move(value)).second)
            throw ParseError("duplicate key '" + key + "'", line_no);
    }
    return config;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot read config " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

const Config::Value* Config::find(const std::string& section, const std::string& key) const {
    const auto table = tables_.find(section);
    if (table == tables_.end()) return nullptr;
    const auto it = table->second.find(key);
    return it == table->second.end() ? nullptr : &it->second;
}

namespace {
template <typename T>
std::optional<T> typed(const Config::Value* v, const std::string& section, const std::string& key, const char* type) {
    if (!v) return std::nullopt;
    if (const T* p = std::get_if<T>(v)) return *p;
    throw ArgumentError("config [" + section + "] " + key + ": expected " + type);
}
}  // namespace

std::optional<std::string> Config::get_string(const std::string& section, const std::string& key) const {
    return typed<std::string>(find(section, key), section, key, "string");
}

std::optional<std::int64_t> Config::get_int(const std::string& section, const std::string& key) const {
    return typed<std::int64_t>(find(section, key), section, key, "integer");
}

std::optional<double> Config::get_double(const std::string& section, const std::string& key) const {
    const Value* v = find(section, key);
    if (v)
        if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
    return typed<double>(v, section, key, "number");
}

std::optional<bool> Config::get_bool(const std::string& section, const std::string& key) const {
    return typed<bool>(find(section, key), section, key, "boolean");
}

std::optional<std::vector<std::string>> Config::get_strings(const std::string& section, const std::string& key) const {
    const Value* v = find(section, key);
    if (v)
        if (const auto* s = std::get_if<std::string>(v)) return std::vector<std::string>{*s};
    return typed<std::vector<std::string>>(v, section, key, "string array");
}

void Config::set(const std::string& section, const std::string& key, Value value) {
    tables_[section][key] = std::move(value);
}

}  // namespace devminer
