#include "devminer/features.hpp"

#include "devminer/csv.hpp"
#include "devminer/error.hpp"
#include "devminer/io.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <set>

namespace devminer::features {

std::size_t first_invalid_utf8(std::string_view text) {
    const auto* s = reinterpret_cast<const unsigned char*>(text.data());
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        const unsigned char c = s[i];
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return i;
        }
        if (i + len > n) return i;
        for (std::size_t k = 1; k < len; ++k) {
            if ((s[i + k] & 0xC0) != 0x80) return i;
            cp = (cp << 6) | (s[i + k] & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
            (cp >= 0xD800 && cp <= 0xDFFF))
            return i;
        i += len;
    }
    return std::string_view::npos;
}

namespace {

bool is_token_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

BowVector bow_extract(std::string_view script_text, std::string script_path) {
    if (const auto bad = first_invalid_utf8(script_text); bad != std::string_view::npos) throw EncodingError(bad);
    BowVector v;
    v.script_path = std::move(script_path);
    std::size_t i = 0;
    while (i < script_text.size()) {
        if (!is_token_byte(static_cast<unsigned char>(script_text[i]))) {
            ++i;
            continue;
        }
        std::string token;
        while (i < script_text.size() && is_token_byte(static_cast<unsigned char>(script_text[i]))) {
            const auto c = static_cast<unsigned char>(script_text[i++]);
            token.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
        }
        ++v.token_counts[token];
    }
    return v;
}

namespace {

enum class Tok { word, variable, string, punct };

struct Token {
    Tok kind;
    std::string text;  ///< punctuation: the character(s); string: unquoted body
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

/// Best-effort Puppet lexer: comments dropped, strings collapsed, `::`-joined
/// names kept whole.
std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = s.size();
    auto read_name = [&](std::size_t start) {
        std::size_t j = start;
        while (j < n) {
            if (ident_char(s[j])) {
                ++j;
            } else if (j + 2 < n && s[j] == ':' && s[j + 1] == ':' && ident_start(s[j + 2])) {
                j += 2;
            } else {
                break;
            }
        }
        return j;
    };
    while (i < n) {
        const char c = s[i];
        if (c == '#') {
            while (i < n && s[i] != '\n') ++i;
        } else if (c == '/' && i + 1 < n && s[i + 1] == '*') {
            const auto end = s.find("*/", i + 2);
            i = end == std::string_view::npos ? n : end + 2;
        } else if (c == '\'' || c == '"') {
            std::string body;
            ++i;
            while (i < n && s[i] != c) {
                if (s[i] == '\\' && i + 1 < n) ++i;
                body.push_back(s[i++]);
            }
            if (i < n) ++i;
            out.push_back({Tok::string, std::move(body)});
        } else if (c == '$') {
            std::size_t j = i + 1;
            if (j + 1 < n && s[j] == ':' && s[j + 1] == ':') j += 2;
            const std::size_t end = read_name(j);
            out.push_back({Tok::variable, std::string(s.substr(i, end - i))});
            i = std::max(end, i + 1);
        } else if (ident_start(c) || (c == ':' && i + 2 < n && s[i + 1] == ':' && ident_start(s[i + 2]))) {
            const std::size_t start = c == ':' ? i + 2 : i;
            const std::size_t end = read_name(start);
            out.push_back({Tok::word, std::string(s.substr(start, end - start))});
            i = end;
        } else if (std::isspace(static_cast<unsigned char>(c)) != 0) {
            ++i;
        } else if (c == '=' && i + 1 < n && s[i + 1] == '>') {
            out.push_back({Tok::punct, "=>"});
            i += 2;
        } else if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
            std::size_t j = i;
            while (j < n && (std::isalnum(static_cast<unsigned char>(s[j])) != 0 || s[j] == '.')) ++j;
            out.push_back({Tok::word, std::string(s.substr(i, j - i))});
            i = j;
        } else {
            out.push_back({Tok::punct, std::string(1, c)});
            ++i;
        }
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_punct(const Token& t, std::string_view p) { return t.kind == Tok::punct && t.text == p; }

std::size_t physical_lines(std::string_view text) {
    if (text.empty()) return 0;
    const auto newlines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
    return text.back() == '\n' ? newlines : newlines + 1;
}

}  // namespace

ScriptScan scan_script(std::string_view script_text, std::string script_path) {
    ScriptScan scan;
    scan.quality.script_path = std::move(script_path);
    scan.quality.filelength = physical_lines(script_text);
    const auto tokens = lex(script_text);

    int depth = 0;
    std::vector<int> case_body_depths;  // brace depth inside each open case body
    bool pending_case = false;          // saw `case`, waiting for its `{`

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        const Token* next = i + 1 < tokens.size() ? &tokens[i + 1] : nullptr;
        if (t.kind == Tok::punct) {
            if (t.text == "{") {
                ++depth;
                if (pending_case) {
                    case_body_depths.push_back(depth);
                    pending_case = false;
                }
            } else if (t.text == "}") {
                if (!case_body_depths.empty() && case_body_depths.back() == depth) case_body_depths.pop_back();
                depth = std::max(0, depth - 1);
            } else if (t.text == ":" && !case_body_depths.empty() && case_body_depths.back() == depth) {
                ++scan.quality.complexity;
            }
            continue;
        }
        if (t.kind != Tok::word) continue;
        const std::string word = lower(t.text);
        if (word == "if" || word == "elsif" || word == "unless") {
            ++scan.quality.complexity;
        } else if (word == "case") {
            ++scan.quality.complexity;
            pending_case = true;
        } else if (word == "exec" && next != nullptr && is_punct(*next, "{")) {
            ++scan.quality.execs;
        } else if ((word == "class" || word == "define") && next != nullptr && next->kind == Tok::word) {
            if (word == "class") scan.declared_classes.push_back(lower(next->text));
            std::size_t j = i + 2;
            if (j < tokens.size() && is_punct(tokens[j], "(")) {
                int nest = 0;
                bool expecting = true;
                for (; j < tokens.size(); ++j) {
                    const Token& p = tokens[j];
                    if (p.kind == Tok::punct && (p.text == "(" || p.text == "[" || p.text == "{")) {
                        ++nest;
                    } else if (p.kind == Tok::punct && (p.text == ")" || p.text == "]" || p.text == "}")) {
                        if (--nest == 0) break;
                    } else if (nest == 1 && is_punct(p, ",")) {
                        expecting = true;
                    } else if (nest == 1 && expecting && p.kind == Tok::variable) {
                        ++scan.quality.parameters;
                        expecting = false;
                    }
                }
                i = j;
            } else {
                i += 1;
            }
        } else if (word == "include" || word == "require") {
            // `require => ...` is a metaparameter, not a statement
            std::size_t j = i + 1;
            while (j < tokens.size() && (tokens[j].kind == Tok::word || tokens[j].kind == Tok::string)) {
                scan.referenced_classes.push_back(lower(tokens[j].text));
                if (j + 1 < tokens.size() && is_punct(tokens[j + 1], ",")) {
                    j += 2;
                } else {
                    ++j;
                    break;
                }
            }
            i = j - 1;
        }
    }
    for (auto& name : scan.referenced_classes)
        if (name.starts_with("::")) name.erase(0, 2);
    return scan;
}

std::vector<CodeQualityVector> scan_quality(std::span<const ScriptSource> scripts,
                                            const std::map<std::string, std::size_t>& lint_warnings) {
    std::vector<ScriptScan> scans;
    scans.reserve(scripts.size());
    std::map<std::string, std::vector<std::size_t>> declared_in;
    for (std::size_t k = 0; k < scripts.size(); ++k) {
        scans.push_back(scan_script(scripts[k].text, scripts[k].path));
        for (const auto& name : scans.back().declared_classes) declared_in[name].push_back(k);
    }
    for (std::size_t k = 0; k < scans.size(); ++k) {
        std::set<std::size_t> targets;
        for (const auto& name : scans[k].referenced_classes) {
            const auto it = declared_in.find(name);
            if (it == declared_in.end()) continue;
            for (const auto target : it->second)
                if (target != k) targets.insert(target);
        }
        for (const auto target : targets) ++scans[target].quality.fan_in;
    }
    std::vector<CodeQualityVector> out;
    out.reserve(scans.size());
    for (auto& s : scans) {
        if (const auto it = lint_warnings.find(s.quality.script_path); it != lint_warnings.end())
            s.quality.lint_warnings = it->second;
        out.push_back(std::move(s.quality));
    }
    return out;
}

CodeQualityVector scan_quality(const ScriptSource& script, std::span<const ScriptSource> dataset) {
    std::vector<ScriptSource> all{script};
    for (const auto& other : dataset)
        if (other.path != script.path) all.push_back(other);
    return scan_quality(all).front();
}

namespace {

std::size_t parse_count(const std::string& field, std::size_t line, std::string_view column) {
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || end != field.data() + field.size())
        throw ParseError("column " + std::string(column) + ": not a count '" + field + "'", line);
    return v;
}

const csv::Row kBowHeader{"script", "token", "count"};
const csv::Row kLintHeader{"script", "lint_warnings"};

}  // namespace

std::map<std::string, std::size_t> parse_lint_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front() != kLintHeader) throw ParseError("lint table header mismatch", 1);
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw ParseError("expected 2 columns", i + 1);
        out[rows[i][0]] = parse_count(rows[i][1], i + 1, "lint_warnings");
    }
    return out;
}

std::vector<ScriptSource> load_scripts(const std::filesystem::path& dir, const history::IacFilter& filter) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IngestError("script directory not found: " + dir.string());
    std::vector<ScriptSource> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), dir).generic_string();
        if (!filter(rel)) continue;
        out.push_back({rel, io::read_text(entry.path())});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
}

void write_bow_csv(std::ostream& out, std::span<const BowVector> vectors) {
    csv::write_row(out, kBowHeader);
    for (const auto& v : vectors)
        for (const auto& [token, count] : v.token_counts) csv::write_row(out, {v.script_path, token, std::to_string(count)});
}

std::vector<BowVector> parse_bow_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front() != kBowHeader) throw ParseError("BOW table header mismatch", 1);
    std::map<std::string, BowVector> by_script;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 3) throw ParseError("expected 3 columns", i + 1);
        const auto count = parse_count(row[2], i + 1, "count");
        if (count == 0) throw ParseError("column count: must be at least 1", i + 1);
        auto& v = by_script[row[0]];
        v.script_path = row[0];
        v.token_counts[row[1]] += count;
    }
    std::vector<BowVector> out;
    for (auto& [_, v] : by_script) out.push_back(std::move(v));
    return out;
}

const std::vector<std::string>& quality_feature_names() {
    static const std::vector<std::string> names{"filelength", "complexity", "parameters", "execs", "lint_warnings", "fan_in"};
    return names;
}

void write_quality_csv(std::ostream& out, std::span<const CodeQualityVector> vectors) {
    csv::Row header{"script"};
    for (const auto& n : quality_feature_names()) header.push_back(n);
    csv::write_row(out, header);
    for (const auto& v : vectors) {
        csv::write_row(out, {v.script_path, std::to_string(v.filelength), std::to_string(v.complexity),
                             std::to_string(v.parameters), std::to_string(v.execs), std::to_string(v.lint_warnings),
                             std::to_string(v.fan_in)});
    }
}

std::vector<CodeQualityVector> parse_quality_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    csv::Row header{"script"};
    for (const auto& n : quality_feature_names()) header.push_back(n);
    if (rows.empty() || rows.front() != header) throw ParseError("quality table header mismatch", 1);
    std::vector<CodeQualityVector> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const std::size_t line = i + 1;
        if (row.size() != header.size()) throw ParseError("expected 7 columns", line);
        CodeQualityVector v;
        v.script_path = row[0];
        v.filelength = parse_count(row[1], line, "filelength");
        v.complexity = parse_count(row[2], line, "complexity");
        v.parameters = parse_count(row[3], line, "parameters");
        v.execs = parse_count(row[4], line, "execs");
        v.lint_warnings = parse_count(row[5], line, "lint_warnings");
        v.fan_in = parse_count(row[6], line, "fan_in");
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace devminer::features
