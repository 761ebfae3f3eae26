#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dtinsight/dtdf.hpp"

namespace dtinsight::dsl {

// 1-based line/column; column and length count bytes.
struct SourceSpan {
    int line = 1;
    int column = 1;
    int length = 0;

    bool operator==(const SourceSpan&) const = default;
};

struct ParseDiagnostic {
    SourceSpan span;
    std::string message;
    std::optional<std::string> expected;  // token class, e.g. "':'"
};

std::string format_diagnostic(const ParseDiagnostic& d, std::string_view source_name = {});

// Either a value or the diagnostics that prevented one.
template <typename T>
struct ParseResult {
    std::optional<T> value;
    std::vector<ParseDiagnostic> diagnostics;

    explicit operator bool() const { return value.has_value(); }
};

// Model name used when the source has no `description NAME [ ... ]` wrapper.
inline constexpr std::string_view kDefaultModelName = "description";

// Parses the `.dtdf` description language:
//
//   description incubator [
//     uses DTDFVocab
//     instance simulator : DTDFVocab:Enabler [
//       DTDFVocab:enables what_if_sim
//       base:desc "..."
//     ]
//   ]
//
// The wrapper is optional. Bare instance ids get the model name as prefix.
// Any diagnostic means no model is returned.
ParseResult<dtdf::DescriptionModel> parse_description(std::string_view source);

// Parses a `.dtdfv` vocabulary extension (`concept`, `aspect`,
// `relation entity`, `scalar property`), optionally wrapped in
// `vocabulary PREFIX [ ... ]`; unwrapped names use the DTDFVocab prefix. The
// result is merged over `base`; a declaration identical to an existing one is
// accepted as-is, any other reuse of an existing name is a diagnostic.
ParseResult<dtdf::Vocabulary> parse_vocabulary(std::string_view source,
                                               const dtdf::Vocabulary& base = dtdf::builtin_vocabulary());

// Canonical text form; parse_description(serialize(m)) == m.
std::string serialize(const dtdf::DescriptionModel& model);

}  // namespace dtinsight::dsl
