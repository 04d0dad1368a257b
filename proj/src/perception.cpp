#include "moca/perception.h"

#include "moca/errors.h"
#include "moca/resources.h"
#include "moca/text_util.h"

namespace moca {
namespace {

void replace_once(std::string & s, const std::string & placeholder, const std::string & value) {
    size_t pos = s.find(placeholder);
    if (pos != std::string::npos) {
        s.replace(pos, placeholder.size(), value);
    }
}

bool is_blank(const std::string & s) {
    return text::trim(s).empty();
}

PvResult short_circuit(PvReason reason, bool penalty_applied) {
    PvResult result;
    result.r_p             = 0;
    result.reason          = reason;
    result.penalty_applied = penalty_applied;
    return result;
}

}  // namespace

const char * pv_reason_name(PvReason reason) {
    switch (reason) {
        case PvReason::ProxyCorrect:     return "proxy_correct";
        case PvReason::ProxyWrong:       return "proxy_wrong";
        case PvReason::NoPerception:     return "no_perception";
        case PvReason::OverBudget:       return "over_budget";
        case PvReason::ProxyUnparseable: return "proxy_unparseable";
    }
    return "no_perception";
}

std::string build_blindfold_prompt(const std::string & question, const PerceptionEvidence & evidence) {
    if (text::trim(question).empty()) {
        throw Error(ErrorCode::EmptyQuestion, "blindfold prompt needs a question");
    }
    std::string prompt(blindfold_prompt_template());
    replace_once(prompt, "{question}", question);
    replace_once(prompt, "{evidence}", evidence.evidence_text);
    return prompt;
}

PvResult verify_perception(const Trajectory & traj,
                           Oracle &           proxy_oracle,
                           Oracle &           judge_oracle,
                           const PvConfig &   config) {
    if (!has_perception(traj)) {
        return short_circuit(PvReason::NoPerception, false);
    }

    PerceptionPayload payload = perception_payload(traj, config.unit_budget, config.counter);
    PerceptionEvidence evidence{ payload.evidence_text, payload.unit_count, payload.over_budget,
                                 traj.trajectory_id };

    if (evidence.over_budget && config.penalty_mode == LengthPenaltyMode::Gate) {
        return short_circuit(PvReason::OverBudget, true);
    }

    ChatRequest request;
    request.messages    = { { "user", build_blindfold_prompt(traj.question, evidence) } };
    request.temperature = 0.0;  // one deterministic proxy pass per trajectory

    PvResult result;
    result.proxy_transcript = proxy_oracle.complete(request);
    if (is_blank(result.proxy_transcript)) {
        result.reason = PvReason::ProxyUnparseable;
        return result;
    }
    auto boxed          = text::last_boxed(result.proxy_transcript);
    result.proxy_answer = boxed ? *boxed : result.proxy_transcript;
    if (is_blank(result.proxy_answer)) {
        result.reason = PvReason::ProxyUnparseable;
        return result;
    }

    result.grading = verify_outcome(result.proxy_answer, traj.gold_answer, traj.question,
                                    &judge_oracle, config.judge);
    result.r_p     = result.grading.passed ? 1 : 0;
    result.reason  = result.grading.passed ? PvReason::ProxyCorrect : PvReason::ProxyWrong;
    return result;
}

AgreementStats pv_agreement_audit(const std::vector<PvAuditItem> & items,
                                  Oracle &                         proxy_oracle,
                                  Oracle &                         judge_oracle,
                                  const PvConfig &                 config) {
    if (items.empty()) {
        throw Error(ErrorCode::EmptyList, "pv_agreement_audit needs at least one item");
    }

    ConfusionMatrix matrix;
    for (const PvAuditItem & item : items) {
        // same flow as verify_perception, over a bare evidence triplet
        int verdict = 0;
        if (!is_blank(item.perception_text)) {
            int  units = config.counter ? config.counter(item.perception_text)
                                        : whitespace_word_count(item.perception_text);
            bool over  = units > config.unit_budget;
            if (!(over && config.penalty_mode == LengthPenaltyMode::Gate)) {
                PerceptionEvidence evidence{ item.perception_text, units, over, "" };
                ChatRequest        request;
                request.messages = { { "user", build_blindfold_prompt(item.question, evidence) } };
                std::string transcript = proxy_oracle.complete(request);
                if (!is_blank(transcript)) {
                    auto        boxed  = text::last_boxed(transcript);
                    std::string answer = boxed ? *boxed : transcript;
                    OutcomeResult grading = verify_outcome(answer, item.gold_answer, item.question,
                                                           &judge_oracle, config.judge);
                    verdict = grading.passed ? 1 : 0;
                }
            }
        }
        if (verdict == 1) {
            item.human_label ? ++matrix.tp : ++matrix.fp;
        } else {
            item.human_label ? ++matrix.fn : ++matrix.tn;
        }
    }
    return cohen_kappa(matrix);
}

}  // namespace moca
