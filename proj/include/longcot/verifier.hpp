#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace longcot {

struct ExtractedAnswer {
    std::string raw;         // contents of the last balanced \boxed{...}
    std::size_t begin{0};    // byte offsets of the contents in the origin text
    std::size_t end{0};
};

// Finds the LAST balanced \boxed{...} group. Multi-step traces box several
// candidate answers; the final one is the committed answer.
std::optional<ExtractedAnswer> extract_boxed(std::string_view text);

// Canonical forms for grading. Rational and decimal values are exact
// (int64 numerator/denominator in lowest terms, denominator > 0); anything
// that does not parse falls back to a whitespace/brace-normalized string.
struct CanonicalValue {
    enum class Kind { rational, decimal, integer_tuple, symbolic };

    Kind kind{Kind::symbolic};
    std::int64_t num{0};
    std::int64_t den{1};
    int decimal_places{0};                  // rendering hint for Kind::decimal
    std::vector<std::int64_t> elements;     // Kind::integer_tuple
    std::string text;                       // Kind::symbolic

    bool is_numeric() const { return kind == Kind::rational || kind == Kind::decimal; }
};

std::string_view kind_name(CanonicalValue::Kind kind);

// Strips LaTeX wrappers (\frac family, \left/\right, \text, surrounding $),
// normalizes signs and whitespace, reduces fractions. Idempotent through
// render(): canonicalize(render(v)) == v.
CanonicalValue canonicalize(std::string_view raw);

std::string render(const CanonicalValue& value);

// Kind-aware equality: rational 1/2 equals decimal 0.5; tuples compare
// elementwise; symbolic strings compare after normalization.
bool canonical_equal(const CanonicalValue& a, const CanonicalValue& b);

// Symmetric, reflexive for non-empty inputs.
bool equivalent(std::string_view a, std::string_view b);

// Last boxed answer of `text` graded against `ground_truth`. Absent or empty
// extraction counts as incorrect: an unanswered problem cannot be correct.
bool response_correct(std::string_view text, std::string_view ground_truth);

}  // namespace longcot
