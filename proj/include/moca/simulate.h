#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "moca/credit.h"

namespace moca {

// Synthetic rollouts with latent perception/reasoning success and a noisy PV
// observation, for measuring what the protect/punish routing does to
// perception-token credit relative to a plain group-mean baseline.
struct SimulationConfig {
    uint64_t   seed       = 1;
    int        groups     = 1000;
    int        group_size = 8;
    double     p_perception_ok                 = 0.7;
    double     p_reasoning_ok_given_perception = 0.6;
    double     pv_false_negative_rate          = 0.0919;
    double     pv_false_positive_rate          = 0.0449;
    MocaConfig moca;
};

struct SimulationReport {
    uint64_t seed       = 0;
    int      groups     = 0;
    int      group_size = 0;
    int64_t  trajectories = 0;

    std::map<std::string, int64_t> case_counts;

    // Conditioned on: trajectory failed (R_O = 0) and perception truly ok.
    int64_t conditioned_n            = 0;
    double  conditioned_mean_abs_base = 0.0;
    double  moca_mean_perception_adv = 0.0;
    double  grpo_mean_perception_adv = 0.0;
    double  gap                      = 0.0;  // moca - grpo
};

SimulationReport simulate_groups(const SimulationConfig & config);

}  // namespace moca
