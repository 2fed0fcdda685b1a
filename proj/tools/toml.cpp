#include "toml.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "waveqed/errors.hpp"

namespace waveqed::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

struct Cursor {
    const std::string& s;
    std::size_t pos = 0;
    std::size_t line = 1;

    bool done() const { return pos >= s.size(); }
    char peek() const { return s[pos]; }
    void skip_ws() {
        while (!done() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
};

bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string read_bare_key(Cursor& c) {
    std::size_t start = c.pos;
    while (!c.done() && bare_key_char(c.peek())) ++c.pos;
    if (c.pos == start) fail(c.line, "expected a key");
    return c.s.substr(start, c.pos - start);
}

// dotted path "a.b.c" -> {"a","b","c"}
std::vector<std::string> read_key_path(Cursor& c) {
    std::vector<std::string> path;
    for (;;) {
        c.skip_ws();
        path.push_back(read_bare_key(c));
        c.skip_ws();
        if (c.done() || c.peek() != '.') break;
        ++c.pos;
    }
    return path;
}

std::string read_string(Cursor& c) {
    ++c.pos; // opening quote
    std::string out;
    while (!c.done() && c.peek() != '"') {
        char ch = c.s[c.pos++];
        if (ch == '\n') fail(c.line, "unterminated string");
        if (ch == '\\') {
            if (c.done()) fail(c.line, "unterminated string");
            char esc = c.s[c.pos++];
            switch (esc) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default: fail(c.line, std::string("unknown escape \\") + esc);
            }
        } else {
            out += ch;
        }
    }
    if (c.done()) fail(c.line, "unterminated string");
    ++c.pos; // closing quote
    return out;
}

json read_scalar(Cursor& c) {
    c.skip_ws();
    if (c.done()) fail(c.line, "expected a value");
    char ch = c.peek();
    if (ch == '"') return json(read_string(c));

    std::size_t start = c.pos;
    while (!c.done() && c.peek() != ',' && c.peek() != ']' && c.peek() != '#' &&
           c.peek() != '\n')
        ++c.pos;
    std::string tok = c.s.substr(start, c.pos - start);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.pop_back();
    if (tok.empty()) fail(c.line, "expected a value");
    if (tok == "true") return json(true);
    if (tok == "false") return json(false);

    bool floaty = tok.find_first_of(".eE") != std::string::npos;
    // inf/nan are rejected: every config number must be finite
    const char* begin = tok.c_str();
    char* end = nullptr;
    if (!floaty) {
        long long v = std::strtoll(begin, &end, 10);
        if (end == begin + tok.size()) return json(v);
        floaty = true; // e.g. leading +, fall through to the float path
    }
    double d = std::strtod(begin, &end);
    if (end != begin + tok.size() || !std::isfinite(d))
        fail(c.line, "not a value: '" + tok + "'");
    return json(d);
}

json read_value(Cursor& c) {
    c.skip_ws();
    if (c.done()) fail(c.line, "expected a value");
    if (c.peek() != '[') return read_scalar(c);
    ++c.pos; // '['
    json arr = json::array();
    c.skip_ws();
    if (!c.done() && c.peek() == ']') {
        ++c.pos;
        return arr;
    }
    for (;;) {
        arr.push_back(read_scalar(c));
        c.skip_ws();
        if (c.done() || c.peek() == '\n') fail(c.line, "unterminated array");
        if (c.peek() == ',') {
            ++c.pos;
            continue;
        }
        if (c.peek() == ']') {
            ++c.pos;
            return arr;
        }
        fail(c.line, "expected ',' or ']' in array");
    }
}

// walk/create nested objects along path[0..n-2], return the parent object
json* descend(json* node, const std::vector<std::string>& path, std::size_t line) {
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        json& child = (*node)[path[i]];
        if (child.is_null()) child = json::object();
        if (child.is_array()) {
            if (child.empty()) fail(line, "empty table array '" + path[i] + "'");
            node = &child.back();
            continue;
        }
        if (!child.is_object()) fail(line, "key '" + path[i] + "' is not a table");
        node = &child;
    }
    return node;
}

} // namespace

json parse_toml(const std::string& text) {
    json root = json::object();
    json* current = &root;
    Cursor c{text};

    while (!c.done()) {
        c.skip_ws();
        if (c.done()) break;
        char ch = c.peek();
        if (ch == '\n') {
            ++c.pos;
            ++c.line;
            continue;
        }
        if (ch == '#') {
            while (!c.done() && c.peek() != '\n') ++c.pos;
            continue;
        }
        if (ch == '[') {
            const bool array_header = c.pos + 1 < c.s.size() && c.s[c.pos + 1] == '[';
            c.pos += array_header ? 2 : 1;
            std::vector<std::string> path = read_key_path(c);
            c.skip_ws();
            if (array_header) {
                if (c.done() || c.peek() != ']' || c.pos + 1 >= c.s.size() ||
                    c.s[c.pos + 1] != ']')
                    fail(c.line, "expected ']]'");
                c.pos += 2;
            } else {
                if (c.done() || c.peek() != ']') fail(c.line, "expected ']'");
                ++c.pos;
            }
            json* parent = descend(&root, path, c.line);
            json& slot = (*parent)[path.back()];
            if (array_header) {
                if (slot.is_null()) slot = json::array();
                if (!slot.is_array()) fail(c.line, "'" + path.back() + "' is not a table array");
                slot.push_back(json::object());
                current = &slot.back();
            } else {
                if (slot.is_null()) slot = json::object();
                else fail(c.line, "table '" + path.back() + "' defined twice");
                current = &slot;
            }
        } else {
            std::vector<std::string> path = read_key_path(c);
            c.skip_ws();
            if (c.done() || c.peek() != '=') fail(c.line, "expected '=' after key");
            ++c.pos;
            json value = read_value(c);
            json* parent = descend(current, path, c.line);
            if (parent->contains(path.back()))
                fail(c.line, "key '" + path.back() + "' set twice");
            (*parent)[path.back()] = std::move(value);
        }
        c.skip_ws();
        if (!c.done() && c.peek() == '#')
            while (!c.done() && c.peek() != '\n') ++c.pos;
        if (!c.done()) {
            if (c.peek() != '\n') fail(c.line, "unexpected trailing text");
            ++c.pos;
            ++c.line;
        }
    }
    return root;
}

json parse_toml_value(const std::string& text) {
    Cursor c{text};
    json v = read_value(c);
    c.skip_ws();
    if (!c.done()) throw ConfigError("trailing text after value: '" + text + "'");
    return v;
}

} // namespace waveqed::cli
