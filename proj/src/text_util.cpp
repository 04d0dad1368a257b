#include "moca/text_util.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace moca::text {
namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_digit(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

double magnitude_for(const std::string & word) {
    if (word == "thousand") return 1e3;
    if (word == "million")  return 1e6;
    if (word == "billion")  return 1e9;
    if (word == "trillion") return 1e12;
    return 0.0;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<BoxedMatch> extract_boxed_matches(const std::string & s) {
    static const std::string marker = "\\boxed{";
    std::vector<BoxedMatch>  out;
    size_t pos = 0;
    while ((pos = s.find(marker, pos)) != std::string::npos) {
        size_t start = pos + marker.size();
        int    depth = 1;
        size_t i = start;
        for (; i < s.size(); ++i) {
            if (s[i] == '{') {
                ++depth;
            } else if (s[i] == '}') {
                if (--depth == 0) break;
            }
        }
        if (i >= s.size()) break;  // unterminated box: ignore
        out.push_back({ s.substr(start, i - start), pos, i + 1 });
        pos = i + 1;
    }
    return out;
}

std::vector<std::string> extract_boxed(const std::string & s) {
    std::vector<std::string> out;
    for (auto & m : extract_boxed_matches(s)) out.push_back(std::move(m.content));
    return out;
}

std::optional<std::string> last_boxed(const std::string & s) {
    auto all = extract_boxed(s);
    if (all.empty()) return std::nullopt;
    return all.back();
}

std::string normalize_answer(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(uc)));
        } else {
            pending_space = true;  // punctuation and whitespace both fold to one gap
        }
    }
    return out;
}

bool whole_word_contains(const std::string & haystack_norm, const std::string & needle_norm) {
    if (needle_norm.empty()) return false;
    size_t pos = 0;
    while ((pos = haystack_norm.find(needle_norm, pos)) != std::string::npos) {
        bool left_ok  = pos == 0 || haystack_norm[pos - 1] == ' ';
        size_t end    = pos + needle_norm.size();
        bool right_ok = end == haystack_norm.size() || haystack_norm[end] == ' ';
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

std::optional<ParsedNumber> parse_number(std::string_view input) {
    std::string s = trim(input);
    if (s.empty()) return std::nullopt;

    // leading currency marker
    if (s[0] == '$') s = trim(s.substr(1));

    bool percent = false;
    if (!s.empty() && s.back() == '%') {
        percent = true;
        s = trim(s.substr(0, s.size() - 1));
    }

    // trailing magnitude word
    double magnitude = 1.0;
    {
        size_t ws = s.find_last_of(" \t");
        if (ws != std::string::npos) {
            double m = magnitude_for(lower(trim(s.substr(ws + 1))));
            if (m > 0.0) {
                magnitude = m;
                s = trim(s.substr(0, ws));
            }
        }
    }

    // thousands separators: digit groups joined by commas
    std::string digits;
    digits.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == ',') {
            if (i == 0 || !is_digit(s[i - 1]) || i + 1 >= s.size() || !is_digit(s[i + 1])) {
                return std::nullopt;
            }
            continue;
        }
        digits.push_back(s[i]);
    }
    if (digits.empty()) return std::nullopt;

    // simple fraction a/b
    size_t slash = digits.find('/');
    if (slash != std::string::npos && slash > 0 && slash + 1 < digits.size() &&
        digits.find('/', slash + 1) == std::string::npos) {
        auto num = parse_real_strict(digits.substr(0, slash));
        auto den = parse_real_strict(digits.substr(slash + 1));
        if (num && den && *den != 0.0) {
            return ParsedNumber{*num / *den * magnitude, percent};
        }
        return std::nullopt;
    }

    auto value = parse_real_strict(digits);
    if (!value) return std::nullopt;
    return ParsedNumber{*value * magnitude, percent};
}

bool numbers_equivalent(const ParsedNumber & a, const ParsedNumber & b) {
    auto close = [](double x, double y) {
        double scale = std::max({std::fabs(x), std::fabs(y), 1.0});
        return std::fabs(x - y) <= 1e-9 * scale;
    };
    if (a.percent == b.percent) return close(a.value, b.value);
    // one side carries a % sign: "50%" matches both 50 and 0.5
    const ParsedNumber & pct   = a.percent ? a : b;
    const ParsedNumber & plain = a.percent ? b : a;
    return close(pct.value, plain.value) || close(pct.value / 100.0, plain.value);
}

std::optional<std::string> last_number_token(const std::string & s) {
    std::optional<std::string> best;
    size_t i = 0;
    while (i < s.size()) {
        if (!is_digit(s[i]) &&
            !((s[i] == '-' || s[i] == '+' || s[i] == '.') && i + 1 < s.size() && is_digit(s[i + 1]))) {
            ++i;
            continue;
        }
        size_t start = i;
        if (s[i] == '-' || s[i] == '+') ++i;
        while (i < s.size() && (is_digit(s[i]) || s[i] == ',' || s[i] == '.')) ++i;
        size_t end = i;
        // drop trailing sentence punctuation
        while (end > start && (s[end - 1] == '.' || s[end - 1] == ',')) --end;
        if (end == start) continue;

        std::string token = s.substr(start, end - start);
        size_t after = end;
        while (after < s.size() && s[after] == ' ') ++after;
        if (after < s.size() && s[after] == '%') {
            token += "%";
        } else {
            size_t we = after;
            while (we < s.size() && std::isalpha(static_cast<unsigned char>(s[we]))) ++we;
            if (magnitude_for(lower(s.substr(after, we - after))) > 0.0) {
                token += " " + s.substr(after, we - after);
            }
        }
        if (parse_number(token)) best = token;
    }
    return best;
}

std::optional<double> parse_real_strict(std::string_view input) {
    std::string s = trim(input);
    if (s.empty()) return std::nullopt;
    const char * begin = s.c_str();
    char *       end   = nullptr;
    errno = 0;
    double value = std::strtod(begin, &end);
    if (end == begin || errno == ERANGE) return std::nullopt;
    while (*end != '\0') {
        if (!is_space(*end)) return std::nullopt;
        ++end;
    }
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace moca::text
