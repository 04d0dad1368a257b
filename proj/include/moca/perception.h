#pragma once

#include <string>
#include <vector>

#include "moca/metrics.h"
#include "moca/oracle.h"
#include "moca/outcome.h"
#include "moca/trajectory.h"

namespace moca {

struct PerceptionEvidence {
    std::string evidence_text;  // Perception-block content only
    int         unit_count  = 0;
    bool        over_budget = false;
    std::string source_trajectory_id;
};

enum class PvReason { ProxyCorrect, ProxyWrong, NoPerception, OverBudget, ProxyUnparseable };

const char * pv_reason_name(PvReason reason);

struct PvResult {
    int           r_p = 0;  // binary
    std::string   proxy_answer;
    std::string   proxy_transcript;
    OutcomeResult grading;
    bool          penalty_applied = false;
    PvReason      reason          = PvReason::NoPerception;
};

enum class LengthPenaltyMode {
    Gate,      // over-budget evidence scores r_p = 0 before any oracle call
    Additive,  // PV runs normally; the penalty is charged against the return
};

struct PvConfig {
    int               unit_budget  = 800;
    LengthPenaltyMode penalty_mode = LengthPenaltyMode::Gate;
    JudgeParams       judge;
    UnitCounter       counter;  // null = whitespace word count
};

// Prompt for the blindfolded text-only proxy: the question plus the perception
// evidence, nothing else. No image reference, no reasoning or answer content.
std::string build_blindfold_prompt(const std::string & question, const PerceptionEvidence & evidence);

// The blindfolded-reasoner test: feed the proxy only (Q, perception text),
// grade its answer against the gold answer with the outcome verifier.
// NoPerception and OverBudget short-circuit with zero oracle calls.
PvResult verify_perception(const Trajectory & traj,
                           Oracle &           proxy_oracle,
                           Oracle &           judge_oracle,
                           const PvConfig &   config);

struct PvAuditItem {
    std::string question;
    std::string perception_text;
    std::string gold_answer;
    bool        human_label = false;  // true = Sufficient
};

// Runs the PV flow per item and tabulates oracle verdicts against human
// majority labels into a 2x2 confusion matrix (positive = Sufficient).
AgreementStats pv_agreement_audit(const std::vector<PvAuditItem> & items,
                                  Oracle &                         proxy_oracle,
                                  Oracle &                         judge_oracle,
                                  const PvConfig &                 config);

}  // namespace moca
