#pragma once

#include <string>
#include <string_view>

// Small formatting helpers shared by the DSL writer, the report and the
// telemetry wire format.
namespace dtinsight::text {

// Shortest decimal (no exponent) that parses back to the same double.
std::string format_decimal(double v);

// Shortest round-trip form; may use an exponent. JSON-safe for finite values.
std::string format_json_number(double v);

// Double-quoted DSL string literal with \" \\ \n \t \r and \uXXXX escapes.
std::string quote(std::string_view s);

std::string html_escape(std::string_view s);

std::string trim(std::string_view s);

}  // namespace dtinsight::text
