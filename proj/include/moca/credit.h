#pragma once

#include <string>
#include <vector>

#include "moca/trajectory.h"

namespace moca {

struct MocaConfig {
    double lambda          = 0.3;  // perception weight in R = R_O + lambda * R_P
    double alpha_protect   = 0.2;  // must stay < 1 so protection never flips a penalty
    double alpha_punish    = 0.2;
    double outcome_weight  = 1.0;
    double pass_threshold  = 0.5;
    bool   binarize_return = false;  // strict binary R_O instead of the graded score
    bool   std_normalize   = false;  // off by default: baseline is the plain group mean
    double length_penalty  = 0.3;    // only charged in additive length-penalty mode
};

struct RewardRecord {
    std::string trajectory_id;
    double      r_o_score       = 0.0;  // in [0,1]
    bool        r_o_passed      = false;
    int         r_p             = 0;  // binary
    bool        penalty_applied = false;
    double      return_value    = 0.0;  // R(tau)
};

struct GroupSample {
    std::vector<RewardRecord> records;
    std::vector<Trajectory>   trajectories;  // aligned by index and id
    std::vector<SpanMap>      span_maps;
};

enum class CaseLabel { Success, BadThinking, BadSeeing, FailedNoPerceptionInfo };

const char * case_label_name(CaseLabel label);

struct SpanAdvantage {
    int    begin = 0;
    int    end   = 0;  // half-open, token or char units per TokenAdvantages::token_units
    double value = 0.0;
};

struct TokenAdvantages {
    std::string                trajectory_id;
    double                     base_advantage = 0.0;
    CaseLabel                  case_label     = CaseLabel::Success;
    bool                       token_units    = true;
    std::vector<SpanAdvantage> spans;  // tile the covered range; adjacent equal values merged
};

// R(tau) = outcome_weight * R_O + lambda * R_P. With binarize_return the
// graded outcome score is thresholded to {0,1} first.
double trajectory_return(double r_o_score, int r_p, const MocaConfig & config);

// Group-mean baseline, no standard-deviation division unless std_normalize
// is set. Outputs sum to zero.
std::vector<double> group_base_advantages(const std::vector<double> & returns,
                                          const MocaConfig &          config = {});

// Routes credit for failed trajectories: verified perception is protected
// (base + alpha_protect * |base|), failed perception is punished
// (base - alpha_punish * |base|). Successes keep the uniform base.
TokenAdvantages moca_token_advantages(double               base_advantage,
                                      const RewardRecord & record,
                                      const SpanMap &      span_map,
                                      const MocaConfig &   config);

// Full per-group pipeline: returns -> base advantages -> per-token routing.
// Output order matches input order.
std::vector<TokenAdvantages> assemble_group(const GroupSample & group, const MocaConfig & config);

// Variant used by the offline recompute path, where no Trajectory objects
// exist: records plus span maps only.
std::vector<TokenAdvantages> assemble_records(const std::vector<RewardRecord> & records,
                                              const std::vector<SpanMap> &      span_maps,
                                              const MocaConfig &                config);

}  // namespace moca
