#pragma once

#include <optional>
#include <string>
#include <vector>

#include "moca/oracle.h"

namespace moca {

enum class AnswerType { Numerical, SimplePhrase, MultiChoice, Sentence, Unknown };

const char * answer_type_name(AnswerType type);

enum class ParseStatus { Parsed, NoBoxedScore, OutOfRange };

enum class VerdictSource { SvvJudge, Deterministic, RigidRule, NaivePrompt };

struct Verdict {
    double        score        = 0.0;  // always in [0,1]
    AnswerType    answer_type  = AnswerType::Unknown;
    ParseStatus   parse_status = ParseStatus::Parsed;
    std::string   transcript;          // full judge output, or "deterministic"
    VerdictSource source       = VerdictSource::Deterministic;
};

enum class Aggregation { Single, MajorityOnPass, MedianScore };

struct JudgeParams {
    double      temperature    = 0.0;
    int         runs           = 1;
    double      pass_threshold = 0.5;
    Aggregation aggregation    = Aggregation::Single;

    // K=5 at T=0.7 with majority aggregation, as used for reliability studies.
    static JudgeParams consistency_study();
};

struct OutcomeResult {
    std::vector<Verdict>  verdicts;
    double                score  = 0.0;
    bool                  passed = false;
    std::optional<double> consistency;  // absent when runs == 1
};

enum class ChallengeCategory { ExactMatch, SemanticRephrase, SubtleError, MixedFact };

struct ChallengeItem {
    std::string                model_answer;
    std::string                gold_answer;
    std::optional<std::string> question;
    bool                       human_label = false;  // true = Correct
    ChallengeCategory          category    = ChallengeCategory::ExactMatch;
};

// Instantiates the bundled verification protocol. Only the three placeholder
// sites change; every other template byte is preserved.
std::string build_svv_prompt(const std::optional<std::string> & question,
                             const std::string &                gold_answer,
                             const std::string &                prediction);

// Score = numeric content of the last parseable \boxed{}; out-of-range values
// saturate to the nearer bound, a missing box scores 0. Never throws.
Verdict parse_svv_verdict(const std::string & judge_output);

AnswerType classify_answer_type(const std::string &                gold_answer,
                                const std::optional<std::string> & question = std::nullopt);

// Deterministic scorers for types A-C; nullopt means the episode needs a judge.
std::optional<Verdict> deterministic_verify(const std::string &                prediction,
                                            const std::string &                gold_answer,
                                            AnswerType                         answer_type,
                                            const std::optional<std::string> & question = std::nullopt);

// Exact string match / whole-word keyword / last-boxed comparison. Pure.
Verdict rigid_rule_verify(const std::string & prediction, const std::string & gold_answer);

OutcomeResult naive_judge_verify(const std::string & prediction,
                                 const std::string & gold_answer,
                                 Oracle &            oracle,
                                 const JudgeParams & params);

enum class VerifyMode { SvvFirstDeterministic, SvvAlways };

OutcomeResult verify_outcome(const std::string &                prediction,
                             const std::string &                gold_answer,
                             const std::optional<std::string> & question,
                             Oracle *                           oracle,
                             const JudgeParams &                params,
                             VerifyMode                         mode = VerifyMode::SvvAlways);

// Fraction of items whose all-K-runs-identical flag is set.
double consistency_rate(const std::vector<bool> & per_item_flags);

}  // namespace moca
