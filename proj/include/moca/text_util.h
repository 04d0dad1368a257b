#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moca::text {

struct BoxedMatch {
    std::string content;
    size_t      begin = 0;  // offset of the backslash
    size_t      end   = 0;  // one past the closing brace
};

// All \boxed{...} occurrences in order of appearance, braces balanced.
std::vector<BoxedMatch> extract_boxed_matches(const std::string & s);

std::vector<std::string> extract_boxed(const std::string & s);

std::optional<std::string> last_boxed(const std::string & s);

// Lowercased, punctuation folded to spaces, whitespace collapsed, trimmed.
std::string normalize_answer(std::string_view s);

// needle appears in haystack as a contiguous run of whole words; both inputs
// are expected to be normalize_answer output.
bool whole_word_contains(const std::string & haystack_norm, const std::string & needle_norm);

struct ParsedNumber {
    double value   = 0.0;
    bool   percent = false;
};

// Accepts plain reals, thousands separators, leading currency symbols,
// trailing %, magnitude words (thousand/million/billion/trillion), scientific
// notation and simple fractions ("3/4").
std::optional<ParsedNumber> parse_number(std::string_view s);

bool numbers_equivalent(const ParsedNumber & a, const ParsedNumber & b);

// Last numeric token in free text, with its attached %/magnitude word.
std::optional<std::string> last_number_token(const std::string & s);

// Strict real for \boxed{score} contents: nothing but a number (and blanks).
std::optional<double> parse_real_strict(std::string_view s);

std::string trim(std::string_view s);

}  // namespace moca::text
