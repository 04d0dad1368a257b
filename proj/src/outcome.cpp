#include "moca/outcome.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>

#include "moca/errors.h"
#include "moca/resources.h"
#include "moca/text_util.h"
#include "moca/trajectory.h"

namespace moca {
namespace {

constexpr const char * kNaivePrompt =
    "Is the model prediction semantically equivalent to the given ground truth answers? "
    "output TRUE if equivalent, otherwise FALSE.";

void replace_once(std::string & s, const std::string & placeholder, const std::string & value) {
    size_t pos = s.find(placeholder);
    if (pos != std::string::npos) {
        s.replace(pos, placeholder.size(), value);
    }
}

// Single option letter A-H, tolerating "(B)", "B." and friends.
std::optional<char> option_letter_of(const std::string & s) {
    std::string t = text::trim(s);
    size_t      i = 0;
    if (i < t.size() && t[i] == '(') ++i;
    if (i >= t.size()) return std::nullopt;
    char c = t[i];
    if (c >= 'a' && c <= 'h') c = static_cast<char>(c - 'a' + 'A');
    if (c < 'A' || c > 'H') return std::nullopt;
    ++i;
    if (i < t.size() && (t[i] == ')' || t[i] == '.' || t[i] == ':')) ++i;
    if (i != t.size()) return std::nullopt;
    return c;
}

struct OptionMarker {
    char   letter;
    size_t marker_begin;
    size_t content_begin;
};

// Enumerated options in free text: "A. foo", "B) bar", "(C) baz", "D: qux".
std::vector<OptionMarker> find_option_markers(const std::string & s) {
    std::vector<OptionMarker> out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i > 0 && std::isalnum(static_cast<unsigned char>(s[i - 1]))) continue;
        size_t j     = i;
        bool   paren = s[j] == '(';
        if (paren) ++j;
        if (j >= s.size() || s[j] < 'A' || s[j] > 'H') continue;
        char   letter = s[j];
        size_t k      = j + 1;
        if (paren) {
            if (k >= s.size() || s[k] != ')') continue;
            ++k;
        } else {
            if (k >= s.size() || (s[k] != '.' && s[k] != ')' && s[k] != ':')) continue;
            ++k;
        }
        if (k < s.size() && std::isalnum(static_cast<unsigned char>(s[k]))) continue;
        out.push_back({ letter, i, k });
    }
    return out;
}

std::map<char, std::string> parse_options(const std::optional<std::string> & question) {
    std::map<char, std::string> options;
    if (!question) return options;
    auto markers = find_option_markers(*question);
    for (size_t m = 0; m < markers.size(); ++m) {
        size_t content_end =
            m + 1 < markers.size() ? markers[m + 1].marker_begin : question->size();
        std::string content =
            text::trim(question->substr(markers[m].content_begin,
                                        content_end - markers[m].content_begin));
        while (!content.empty() && (content.back() == ',' || content.back() == ';')) {
            content.pop_back();
            content = text::trim(content);
        }
        if (!options.count(markers[m].letter)) options[markers[m].letter] = content;
    }
    return options;
}

// Last standalone uppercase letter A-H in free text, for "The answer is B".
std::optional<char> last_letter_mention(const std::string & s) {
    std::optional<char> best;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c < 'A' || c > 'H') continue;
        bool left_ok  = i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1]));
        bool right_ok = i + 1 == s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 1]));
        if (left_ok && right_ok) best = c;
    }
    return best;
}

Verdict make_deterministic(double score, AnswerType type) {
    Verdict v;
    v.score        = score;
    v.answer_type  = type;
    v.parse_status = ParseStatus::Parsed;
    v.transcript   = "deterministic";
    v.source       = VerdictSource::Deterministic;
    return v;
}

double median_of(std::vector<double> scores) {
    std::sort(scores.begin(), scores.end());
    size_t n = scores.size();
    return n % 2 == 1 ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
}

OutcomeResult aggregate_verdicts(std::vector<Verdict> verdicts, const JudgeParams & params) {
    OutcomeResult result;
    std::vector<double> scores;
    scores.reserve(verdicts.size());
    int passes = 0;
    for (const Verdict & v : verdicts) {
        scores.push_back(v.score);
        if (v.score >= params.pass_threshold) ++passes;
    }
    const int k = static_cast<int>(verdicts.size());
    switch (params.aggregation) {
        case Aggregation::Single:
            result.score  = scores.front();
            result.passed = result.score >= params.pass_threshold;
            break;
        case Aggregation::MajorityOnPass:
            result.score  = median_of(scores);
            result.passed = 2 * passes > k;
            break;
        case Aggregation::MedianScore:
            result.score  = median_of(scores);
            result.passed = result.score >= params.pass_threshold;
            break;
    }
    if (k > 1) {
        result.consistency = (passes == 0 || passes == k) ? 1.0 : 0.0;
    }
    result.verdicts = std::move(verdicts);
    return result;
}

std::optional<int64_t> run_seed(const JudgeParams & params, int run) {
    // distinct seeds keep multi-run episodes distinguishable under
    // digest-keyed record/replay
    if (params.runs > 1) return static_cast<int64_t>(run);
    return std::nullopt;
}

}  // namespace

const char * answer_type_name(AnswerType type) {
    switch (type) {
        case AnswerType::Numerical:    return "numerical";
        case AnswerType::SimplePhrase: return "simple_phrase";
        case AnswerType::MultiChoice:  return "multi_choice";
        case AnswerType::Sentence:     return "sentence";
        case AnswerType::Unknown:      return "unknown";
    }
    return "unknown";
}

JudgeParams JudgeParams::consistency_study() {
    JudgeParams params;
    params.temperature = 0.7;
    params.runs        = 5;
    params.aggregation = Aggregation::MajorityOnPass;
    return params;
}

std::string build_svv_prompt(const std::optional<std::string> & question,
                             const std::string &                gold_answer,
                             const std::string &                prediction) {
    if (gold_answer.empty()) throw Error(ErrorCode::EmptyField, "gold_answer");
    if (prediction.empty()) throw Error(ErrorCode::EmptyField, "prediction");

    std::string prompt(svv_prompt_template());
    std::string question_section;
    if (question && !text::trim(*question).empty()) {
        question_section = "Question: " + *question + "\n";
    }
    replace_once(prompt, "{question_section}", question_section);
    replace_once(prompt, "{ground_truth}", gold_answer);
    replace_once(prompt, "{prediction}", prediction);
    return prompt;
}

Verdict parse_svv_verdict(const std::string & judge_output) {
    Verdict v;
    v.source     = VerdictSource::SvvJudge;
    v.transcript = judge_output;

    static const std::regex type_re(R"(Ground Truth Type:\s*\[?\s*([A-D]))");
    std::smatch m;
    if (std::regex_search(judge_output, m, type_re)) {
        switch (m[1].str()[0]) {
            case 'A': v.answer_type = AnswerType::Numerical; break;
            case 'B': v.answer_type = AnswerType::SimplePhrase; break;
            case 'C': v.answer_type = AnswerType::MultiChoice; break;
            case 'D': v.answer_type = AnswerType::Sentence; break;
        }
    }

    auto boxes = text::extract_boxed(judge_output);
    for (auto it = boxes.rbegin(); it != boxes.rend(); ++it) {
        auto value = text::parse_real_strict(*it);
        if (!value) continue;
        if (*value < 0.0) {
            v.score        = 0.0;
            v.parse_status = ParseStatus::OutOfRange;
        } else if (*value > 1.0) {
            v.score        = 1.0;
            v.parse_status = ParseStatus::OutOfRange;
        } else {
            v.score        = *value;
            v.parse_status = ParseStatus::Parsed;
        }
        return v;
    }
    v.score        = 0.0;
    v.parse_status = ParseStatus::NoBoxedScore;
    return v;
}

AnswerType classify_answer_type(const std::string &                gold_answer,
                                const std::optional<std::string> & question) {
    if (option_letter_of(gold_answer) && question) {
        auto        markers = find_option_markers(*question);
        std::string seen;
        for (const auto & marker : markers) {
            if (seen.find(marker.letter) == std::string::npos) seen += marker.letter;
        }
        if (seen.size() >= 2) return AnswerType::MultiChoice;
    }
    if (text::parse_number(gold_answer)) return AnswerType::Numerical;
    if (whitespace_word_count(gold_answer) <= 5) return AnswerType::SimplePhrase;
    return AnswerType::Sentence;
}

std::optional<Verdict> deterministic_verify(const std::string &                prediction,
                                            const std::string &                gold_answer,
                                            AnswerType                         answer_type,
                                            const std::optional<std::string> & question) {
    switch (answer_type) {
        case AnswerType::Numerical: {
            auto gold_num = text::parse_number(gold_answer);
            if (!gold_num) return std::nullopt;

            auto boxed = text::last_boxed(prediction);
            std::optional<text::ParsedNumber> pred_num;
            bool boxed_numeric = false;
            if (boxed) {
                pred_num      = text::parse_number(*boxed);
                boxed_numeric = pred_num.has_value();
            }
            if (!boxed_numeric) {
                if (auto token = text::last_number_token(prediction)) {
                    pred_num = text::parse_number(*token);
                }
            }
            double score = pred_num && text::numbers_equivalent(*pred_num, *gold_num) ? 1.0 : 0.0;
            if (!boxed_numeric) {
                score = std::max(0.0, score - 0.1);  // missing or improper \boxed{}
            }
            return make_deterministic(score, answer_type);
        }
        case AnswerType::SimplePhrase: {
            std::string gold_norm = text::normalize_answer(gold_answer);
            if (gold_norm.empty()) return std::nullopt;
            auto boxed = text::last_boxed(prediction);
            if ((boxed && text::normalize_answer(*boxed) == gold_norm) ||
                text::normalize_answer(prediction) == gold_norm) {
                return make_deterministic(1.0, answer_type);
            }
            return std::nullopt;
        }
        case AnswerType::MultiChoice: {
            auto gold_letter = option_letter_of(gold_answer);
            if (!gold_letter) return std::nullopt;

            auto options = parse_options(question);
            std::string gold_content;
            if (auto it = options.find(*gold_letter); it != options.end()) {
                gold_content = text::normalize_answer(it->second);
            }

            auto boxes = text::extract_boxed_matches(prediction);
            if (!boxes.empty()) {
                const auto & box         = boxes.back();
                auto         boxed_letter = option_letter_of(box.content);
                if (boxed_letter) {
                    if (*boxed_letter != *gold_letter) {
                        return make_deterministic(0.0, answer_type);
                    }
                    // correct letter; trailing correct content demotes to 0.7
                    std::string following =
                        text::normalize_answer(prediction.substr(box.end));
                    if (!gold_content.empty() &&
                        text::whole_word_contains(following, gold_content)) {
                        return make_deterministic(0.7, answer_type);
                    }
                    return make_deterministic(1.0, answer_type);
                }
                std::string boxed_norm = text::normalize_answer(box.content);
                if (!gold_content.empty() &&
                    (boxed_norm == gold_content ||
                     text::whole_word_contains(boxed_norm, gold_content))) {
                    return make_deterministic(0.3, answer_type);
                }
                return make_deterministic(0.0, answer_type);
            }
            auto mention = last_letter_mention(prediction);
            if (mention && *mention == *gold_letter) {
                return make_deterministic(0.9, answer_type);
            }
            return make_deterministic(0.0, answer_type);
        }
        case AnswerType::Sentence:
        case AnswerType::Unknown:
            return std::nullopt;
    }
    return std::nullopt;
}

Verdict rigid_rule_verify(const std::string & prediction, const std::string & gold_answer) {
    auto        boxed     = text::last_boxed(prediction);
    std::string extracted = boxed ? *boxed : prediction;

    std::string gold_norm = text::normalize_answer(gold_answer);
    bool match = text::normalize_answer(prediction) == gold_norm;
    if (!match && boxed) {
        match = text::trim(*boxed) == text::trim(gold_answer);
    }
    if (!match && !gold_norm.empty()) {
        match = text::whole_word_contains(text::normalize_answer(extracted), gold_norm);
    }

    Verdict v = make_deterministic(match ? 1.0 : 0.0, AnswerType::Unknown);
    v.source  = VerdictSource::RigidRule;
    return v;
}

OutcomeResult naive_judge_verify(const std::string & prediction,
                                 const std::string & gold_answer,
                                 Oracle &            oracle,
                                 const JudgeParams & params) {
    std::string prompt = std::string(kNaivePrompt) + "\n\nGround Truth Answer: " + gold_answer +
                         "\nModel Prediction: " + prediction + "\n";

    std::vector<Verdict> verdicts;
    verdicts.reserve(params.runs);
    for (int run = 0; run < params.runs; ++run) {
        ChatRequest request;
        request.messages    = { { "user", prompt } };
        request.temperature = params.temperature;
        request.seed        = run_seed(params, run);
        std::string output  = oracle.complete(request);

        // last TRUE/FALSE token decides, case-insensitive
        std::optional<bool> decided;
        static const std::regex tf_re(R"(\b(TRUE|FALSE)\b)", std::regex::icase);
        for (auto it = std::sregex_iterator(output.begin(), output.end(), tf_re);
             it != std::sregex_iterator(); ++it) {
            std::string token = (*it)[1].str();
            decided = token.size() == 4;  // "TRUE"
        }
        Verdict v;
        v.source     = VerdictSource::NaivePrompt;
        v.transcript = output;
        if (decided) {
            v.score        = *decided ? 1.0 : 0.0;
            v.parse_status = ParseStatus::Parsed;
        } else {
            v.score        = 0.0;
            v.parse_status = ParseStatus::NoBoxedScore;
        }
        verdicts.push_back(std::move(v));
    }
    return aggregate_verdicts(std::move(verdicts), params);
}

OutcomeResult verify_outcome(const std::string &                prediction,
                             const std::string &                gold_answer,
                             const std::optional<std::string> & question,
                             Oracle *                           oracle,
                             const JudgeParams &                params,
                             VerifyMode                         mode) {
    AnswerType type = classify_answer_type(gold_answer, question);

    if (mode == VerifyMode::SvvFirstDeterministic) {
        if (auto verdict = deterministic_verify(prediction, gold_answer, type, question)) {
            OutcomeResult result;
            result.score  = verdict->score;
            result.passed = result.score >= params.pass_threshold;
            result.verdicts.push_back(std::move(*verdict));
            return result;
        }
    }

    if (oracle == nullptr) {
        throw Error(ErrorCode::OracleUnavailable, "judge oracle required but not configured");
    }

    std::string prompt = build_svv_prompt(question, gold_answer, prediction);
    std::vector<Verdict> verdicts;
    verdicts.reserve(params.runs);
    for (int run = 0; run < params.runs; ++run) {
        ChatRequest request;
        request.messages    = { { "user", prompt } };
        request.temperature = params.temperature;
        request.seed        = run_seed(params, run);
        Verdict v           = parse_svv_verdict(oracle->complete(request));
        if (v.answer_type == AnswerType::Unknown) v.answer_type = type;
        verdicts.push_back(std::move(v));
    }
    return aggregate_verdicts(std::move(verdicts), params);
}

double consistency_rate(const std::vector<bool> & per_item_flags) {
    if (per_item_flags.empty()) {
        throw Error(ErrorCode::EmptyList, "consistency_rate needs at least one item");
    }
    int64_t hits = 0;
    for (bool flag : per_item_flags) {
        if (flag) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(per_item_flags.size());
}

}  // namespace moca
