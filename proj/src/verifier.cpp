#include "longcot/verifier.hpp"

#include <cctype>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#include "longcot/common.hpp"

namespace longcot {

namespace {

constexpr std::string_view kBoxedToken = "\\boxed{";

// Exact rational with explicit validity; all arithmetic overflow-checked so
// absurd inputs degrade to the symbolic fallback instead of wrapping.
struct Rat {
    std::int64_t num{0};
    std::int64_t den{1};
};

bool checked_mul(std::int64_t a, std::int64_t b, std::int64_t& out) { return !__builtin_mul_overflow(a, b, &out); }
bool checked_add(std::int64_t a, std::int64_t b, std::int64_t& out) { return !__builtin_add_overflow(a, b, &out); }

std::optional<Rat> reduce(Rat r) {
    if (r.den == 0) {
        return std::nullopt;
    }
    if (r.num == INT64_MIN || r.den == INT64_MIN) {
        return std::nullopt;  // |INT64_MIN| is not representable
    }
    if (r.den < 0) {
        r.num = -r.num;
        r.den = -r.den;
    }
    std::int64_t g = std::gcd(r.num < 0 ? -r.num : r.num, r.den);
    if (g > 1) {
        r.num /= g;
        r.den /= g;
    }
    return r;
}

std::optional<Rat> divide(Rat a, Rat b) {
    if (b.num == 0) {
        return std::nullopt;
    }
    Rat out;
    if (!checked_mul(a.num, b.den, out.num) || !checked_mul(a.den, b.num, out.den)) {
        return std::nullopt;
    }
    return reduce(out);
}

// Replaces every "\<macro>{...}" with its balanced contents, innermost last.
std::string unwrap_macro(std::string text, std::string_view macro) {
    std::string token = std::string("\\") + std::string(macro) + "{";
    for (int guard = 0; guard < 64; ++guard) {
        std::size_t at = text.find(token);
        if (at == std::string::npos) {
            break;
        }
        std::size_t open = at + token.size();
        int depth = 1;
        std::size_t i = open;
        for (; i < text.size() && depth > 0; ++i) {
            if (text[i] == '{') {
                ++depth;
            } else if (text[i] == '}') {
                --depth;
            }
        }
        if (depth != 0) {
            break;  // unbalanced; leave as-is for the symbolic fallback
        }
        std::string inner = text.substr(open, i - 1 - open);
        text = text.substr(0, at) + inner + text.substr(i);
    }
    return text;
}

void erase_all(std::string& text, std::string_view needle) {
    std::size_t at = 0;
    while ((at = text.find(needle, at)) != std::string::npos) {
        text.erase(at, needle.size());
    }
}

void replace_all(std::string& text, std::string_view needle, std::string_view with) {
    std::size_t at = 0;
    while ((at = text.find(needle, at)) != std::string::npos) {
        text.replace(at, needle.size(), with);
        at += with.size();
    }
}

std::string normalize(std::string_view raw) {
    std::string s(raw);
    erase_all(s, "$");
    replace_all(s, "\\dfrac", "\\frac");
    replace_all(s, "\\tfrac", "\\frac");
    replace_all(s, "\\cfrac", "\\frac");
    erase_all(s, "\\left");
    erase_all(s, "\\right");
    erase_all(s, "\\qquad");
    erase_all(s, "\\quad");
    erase_all(s, "\\,");
    erase_all(s, "\\;");
    erase_all(s, "\\:");
    erase_all(s, "\\!");
    replace_all(s, "\\ ", " ");
    s = unwrap_macro(std::move(s), "text");
    s = unwrap_macro(std::move(s), "mathrm");
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            out += c;
        }
    }
    return out;
}

struct Parser {
    std::string_view s;
    std::size_t pos{0};

    bool at_end() const { return pos >= s.size(); }

    bool eat(char c) {
        if (!at_end() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    bool eat_token(std::string_view token) {
        if (s.substr(pos, token.size()) == token) {
            pos += token.size();
            return true;
        }
        return false;
    }

    std::optional<Rat> parse_number() {
        std::size_t start = pos;
        std::int64_t intpart = 0;
        bool any_digit = false;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            std::int64_t scaled;
            if (!checked_mul(intpart, 10, scaled) || !checked_add(scaled, s[pos] - '0', intpart)) {
                return std::nullopt;
            }
            any_digit = true;
            ++pos;
        }
        Rat value{intpart, 1};
        if (!at_end() && s[pos] == '.') {
            ++pos;
            std::int64_t frac = 0;
            std::int64_t scale = 1;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                std::int64_t scaled;
                if (!checked_mul(frac, 10, scaled) || !checked_add(scaled, s[pos] - '0', frac) ||
                    !checked_mul(scale, 10, scale)) {
                    return std::nullopt;
                }
                any_digit = true;
                ++pos;
            }
            std::int64_t numerator;
            if (!checked_mul(intpart, scale, numerator) || !checked_add(numerator, frac, numerator)) {
                return std::nullopt;
            }
            value = Rat{numerator, scale};
        }
        if (!any_digit) {
            pos = start;
            return std::nullopt;
        }
        return reduce(value);
    }

    std::optional<Rat> parse_atom() {
        if (eat_token("\\frac")) {
            if (!eat('{')) {
                return std::nullopt;
            }
            auto numerator = parse_value();
            if (!numerator || !eat('}') || !eat('{')) {
                return std::nullopt;
            }
            auto denominator = parse_value();
            if (!denominator || !eat('}')) {
                return std::nullopt;
            }
            return divide(*numerator, *denominator);
        }
        if (eat('(')) {
            auto inner = parse_value();
            if (!inner || !eat(')')) {
                return std::nullopt;
            }
            return inner;
        }
        if (eat('{')) {
            auto inner = parse_value();
            if (!inner || !eat('}')) {
                return std::nullopt;
            }
            return inner;
        }
        return parse_number();
    }

    // signs atom ('/' signs atom)*, left associative
    std::optional<Rat> parse_value() {
        int sign = 1;
        while (!at_end() && (s[pos] == '+' || s[pos] == '-')) {
            if (s[pos] == '-') {
                sign = -sign;
            }
            ++pos;
        }
        auto value = parse_atom();
        if (!value) {
            return std::nullopt;
        }
        while (!at_end() && s[pos] == '/') {
            ++pos;
            int rhs_sign = 1;
            while (!at_end() && (s[pos] == '+' || s[pos] == '-')) {
                if (s[pos] == '-') {
                    rhs_sign = -rhs_sign;
                }
                ++pos;
            }
            auto rhs = parse_atom();
            if (!rhs) {
                return std::nullopt;
            }
            rhs->num *= rhs_sign;  // |num| <= INT64_MAX after reduce, safe
            value = divide(*value, *rhs);
            if (!value) {
                return std::nullopt;
            }
        }
        if (sign < 0) {
            value->num = -value->num;
        }
        return value;
    }
};

std::optional<Rat> parse_scalar(std::string_view norm) {
    Parser p{norm};
    auto value = p.parse_value();
    if (!value || !p.at_end()) {
        return std::nullopt;
    }
    return value;
}

// signs then one decimal literal with a fractional part, nothing else
int bare_decimal_places(std::string_view norm) {
    std::size_t i = 0;
    while (i < norm.size() && (norm[i] == '+' || norm[i] == '-')) {
        ++i;
    }
    std::size_t digits_before = 0;
    while (i < norm.size() && std::isdigit(static_cast<unsigned char>(norm[i]))) {
        ++i;
        ++digits_before;
    }
    if (i >= norm.size() || norm[i] != '.') {
        return 0;
    }
    ++i;
    std::size_t places = 0;
    while (i < norm.size() && std::isdigit(static_cast<unsigned char>(norm[i]))) {
        ++i;
        ++places;
    }
    if (i != norm.size() || (digits_before == 0 && places == 0)) {
        return 0;
    }
    return static_cast<int>(places);
}

// Components of "(a,b,...)" split at depth-0 commas; nullopt when norm is not
// one paren group spanning the whole string with at least one such comma.
std::optional<std::vector<std::string>> split_tuple(std::string_view norm) {
    if (norm.size() < 2 || norm.front() != '(' || norm.back() != ')') {
        return std::nullopt;
    }
    std::vector<std::string> parts;
    std::string current;
    int depth = 0;
    for (std::size_t i = 0; i < norm.size(); ++i) {
        char c = norm[i];
        if (c == '(' || c == '{' || c == '[') {
            ++depth;
        } else if (c == ')' || c == '}' || c == ']') {
            --depth;
            if (depth == 0 && i + 1 != norm.size()) {
                return std::nullopt;  // outer parens do not span the input
            }
        }
        if (c == ',' && depth == 1) {
            parts.push_back(current);
            current.clear();
        } else if (i != 0 && i + 1 != norm.size()) {
            current += c;
        }
    }
    if (depth != 0 || parts.empty()) {
        return std::nullopt;
    }
    parts.push_back(current);
    return parts;
}

std::string strip_outer_braces(std::string text) {
    while (text.size() >= 2 && text.front() == '{' && text.back() == '}') {
        int depth = 0;
        bool spans = true;
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '{') {
                ++depth;
            } else if (text[i] == '}') {
                --depth;
                if (depth == 0 && i + 1 != text.size()) {
                    spans = false;
                    break;
                }
            }
        }
        if (!spans || depth != 0) {
            break;
        }
        text = text.substr(1, text.size() - 2);
    }
    return text;
}

}  // namespace

std::optional<ExtractedAnswer> extract_boxed(std::string_view text) {
    std::optional<ExtractedAnswer> last;
    std::size_t search = 0;
    while (true) {
        std::size_t at = text.find(kBoxedToken, search);
        if (at == std::string_view::npos) {
            break;
        }
        std::size_t open = at + kBoxedToken.size();
        int depth = 1;
        std::size_t i = open;
        while (i < text.size() && depth > 0) {
            char c = text[i];
            if (c == '\\' && i + 1 < text.size()) {
                i += 2;  // escaped character never changes depth
                continue;
            }
            if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
            }
            ++i;
        }
        if (depth == 0) {
            ExtractedAnswer answer;
            answer.begin = open;
            answer.end = i - 1;
            answer.raw = std::string(text.substr(open, answer.end - open));
            last = std::move(answer);
        }
        search = at + kBoxedToken.size();
    }
    return last;
}

std::string_view kind_name(CanonicalValue::Kind kind) {
    switch (kind) {
        case CanonicalValue::Kind::rational: return "rational";
        case CanonicalValue::Kind::decimal: return "decimal";
        case CanonicalValue::Kind::integer_tuple: return "integer_tuple";
        case CanonicalValue::Kind::symbolic: return "symbolic";
    }
    return "symbolic";
}

CanonicalValue canonicalize(std::string_view raw) {
    std::string norm = normalize(raw);

    if (auto parts = split_tuple(norm)) {
        std::vector<std::int64_t> elements;
        bool all_integers = true;
        for (const auto& part : parts.value()) {
            auto value = parse_scalar(part);
            if (!value || value->den != 1) {
                all_integers = false;
                break;
            }
            elements.push_back(value->num);
        }
        if (all_integers) {
            CanonicalValue out;
            out.kind = CanonicalValue::Kind::integer_tuple;
            out.elements = std::move(elements);
            return out;
        }
    }

    if (auto value = parse_scalar(norm)) {
        CanonicalValue out;
        out.num = value->num;
        out.den = value->den;
        int places = bare_decimal_places(norm);
        if (places > 0) {
            out.kind = CanonicalValue::Kind::decimal;
            out.decimal_places = places;
        } else {
            out.kind = CanonicalValue::Kind::rational;
        }
        return out;
    }

    CanonicalValue out;
    out.kind = CanonicalValue::Kind::symbolic;
    out.text = strip_outer_braces(std::move(norm));
    return out;
}

std::string render(const CanonicalValue& value) {
    switch (value.kind) {
        case CanonicalValue::Kind::rational: {
            if (value.den == 1) {
                return std::to_string(value.num);
            }
            return std::to_string(value.num) + "/" + std::to_string(value.den);
        }
        case CanonicalValue::Kind::decimal: {
            std::int64_t scale = 1;
            for (int i = 0; i < value.decimal_places; ++i) {
                scale *= 10;
            }
            // den divides scale by construction (value came from m / 10^p)
            std::int64_t m = value.num * (scale / value.den);
            bool negative = m < 0;
            std::uint64_t mag = negative ? -static_cast<std::uint64_t>(m) : static_cast<std::uint64_t>(m);
            std::uint64_t uscale = static_cast<std::uint64_t>(scale);
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%s%llu.%0*llu", negative ? "-" : "",
                          static_cast<unsigned long long>(mag / uscale), value.decimal_places,
                          static_cast<unsigned long long>(mag % uscale));
            return buf;
        }
        case CanonicalValue::Kind::integer_tuple: {
            std::string out = "(";
            for (std::size_t i = 0; i < value.elements.size(); ++i) {
                if (i != 0) {
                    out += ", ";
                }
                out += std::to_string(value.elements[i]);
            }
            out += ")";
            return out;
        }
        case CanonicalValue::Kind::symbolic: return value.text;
    }
    return value.text;
}

bool canonical_equal(const CanonicalValue& a, const CanonicalValue& b) {
    if (a.is_numeric() && b.is_numeric()) {
        return a.num == b.num && a.den == b.den;
    }
    if (a.kind != b.kind) {
        return false;
    }
    if (a.kind == CanonicalValue::Kind::integer_tuple) {
        return a.elements == b.elements;
    }
    return a.text == b.text;
}

bool equivalent(std::string_view a, std::string_view b) {
    CanonicalValue ca = canonicalize(a);
    CanonicalValue cb = canonicalize(b);
    if (ca.kind == CanonicalValue::Kind::symbolic && ca.text.empty()) {
        return false;
    }
    if (cb.kind == CanonicalValue::Kind::symbolic && cb.text.empty()) {
        return false;
    }
    return canonical_equal(ca, cb);
}

bool response_correct(std::string_view text, std::string_view ground_truth) {
    auto answer = extract_boxed(text);
    if (!answer || trim(answer->raw).empty()) {
        return false;
    }
    return equivalent(answer->raw, ground_truth);
}

}  // namespace longcot
