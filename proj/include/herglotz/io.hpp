#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "herglotz/errors.hpp"

namespace herglotz::io {

// Shortest decimal representation that round-trips the exact double.
inline std::string fmt(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double x = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error("cannot parse number: '" + std::string(s) + "'");
    return x;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string trim(std::string_view s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string_view::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(a, b - a + 1));
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Rows of comma-separated fields; first row is the header.
inline std::vector<std::vector<std::string>> read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& line : split(text, '\n')) {
        std::string t = trim(line);
        if (t.empty()) continue;
        rows.push_back(split(t, ','));
    }
    return rows;
}

}  // namespace herglotz::io
