#include <cmath>
#include "dtinsight/text.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace dtinsight::text {

std::string format_decimal(double v) {
    if (v == 0) return "0";  // also folds -0
    std::array<char, 400> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
    if (ec != std::errc{}) return "0";
    return std::string(buf.data(), end);
}

std::string format_json_number(double v) {
    if (v == 0) return "0";
    std::array<char, 400> buf{};
    // Plain notation over the range JavaScript prints that way, so epoch
    // timestamps read as 1700000000 rather than 1.7e+09.
    const double mag = std::abs(v);
    const auto fmt = (mag >= 1e-6 && mag < 1e21) ? std::chars_format::fixed : std::chars_format::general;
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, fmt);
    if (ec != std::errc{}) return "0";
    return std::string(buf.data(), end);
}

std::string quote(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    out += '"';
    for (unsigned char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
            if (c < 0x20 || c == 0x7f) {
                char esc[8];
                std::snprintf(esc, sizeof esc, "\\u%04x", c);
                out += esc;
            } else {
                out += static_cast<char>(c);
            }
        }
    }
    out += '"';
    return out;
}

std::string html_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&#39;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string trim(std::string_view s) {
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return std::string(s);
}

}  // namespace dtinsight::text
