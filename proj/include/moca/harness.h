#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moca/credit.h"
#include "moca/metrics.h"
#include "moca/oracle.h"
#include "moca/outcome.h"
#include "moca/perception.h"
#include "moca/trajectory.h"

namespace moca {

struct EngineConfig {
    MocaConfig   moca;
    JudgeParams  judge;
    PvConfig     pv;
    ClientConfig client;
    VerifyMode   verify_mode  = VerifyMode::SvvAlways;
    bool         strict_parse = false;

    static EngineConfig from_json_file(const std::string & path);
    std::string         to_json() const;
};

struct TrajectoryInput {
    Trajectory               trajectory;
    std::string              group_id;
    std::vector<TokenOffset> token_offsets;  // may be empty (char-unit fallback)
};

struct TrajectoryGroup {
    std::string                  group_id;
    std::vector<TrajectoryInput> members;
};

// JSONL, one object per line: {trajectory_id, group_id, question, gold_answer,
// image_ref, raw, token_offsets?}. Malformed lines raise SchemaViolation with
// the 1-based line number.
std::vector<TrajectoryGroup> ingest_trajectories(const std::string & path, bool strict_parse);

struct ScoredTrajectory {
    RewardRecord  record;
    std::string   group_id;
    PvReason      pv_reason = PvReason::NoPerception;
    bool          answer_from_answer_block = true;
    std::string   error;  // non-empty when verification failed for this trajectory
};

struct RunManifest {
    std::string                    config_json;
    int64_t                        trajectories = 0;
    int64_t                        groups       = 0;
    int64_t                        errors       = 0;
    int64_t                        answer_fallbacks = 0;
    std::map<std::string, int64_t> case_counts;

    std::string to_json() const;
};

struct BatchResult {
    std::vector<ScoredTrajectory> scored;      // input order
    std::vector<TokenAdvantages>  advantages;  // input order, groups with errors omitted
    RunManifest                   manifest;
};

// Full pipeline per trajectory: R_O on the extracted final answer, R_P via the
// blindfolded proxy, returns and routed advantages per group. A trajectory
// whose verification errors is emitted with an error marker, never dropped;
// its group is excluded from advantage computation.
BatchResult score_batch(const std::vector<TrajectoryGroup> & groups,
                        Oracle &                             judge_oracle,
                        Oracle &                             proxy_oracle,
                        const EngineConfig &                 config);

std::vector<ChallengeItem> load_challenge_set(const std::string & path);

std::vector<PvAuditItem> load_pv_audit(const std::string & path);

enum class VerifierKind { RigidRule, NaivePrompt, Svv };

MetricsReport evaluate_verifier(const std::vector<ChallengeItem> & challenge_set,
                                VerifierKind                       kind,
                                Oracle *                           oracle,
                                const JudgeParams &                params);

// One report each for RigidRule, NaivePrompt and Svv, in that order.
std::vector<MetricsReport> evaluate_verifiers(const std::vector<ChallengeItem> & challenge_set,
                                              Oracle &                           oracle,
                                              const JudgeParams &                params);

}  // namespace moca
