#include "moca/simulate.h"

#include <cmath>
#include <random>

#include "moca/errors.h"

namespace moca {
namespace {

void check_probability(double p, const char * name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::InvalidProbability, std::string(name) + " = " + std::to_string(p));
    }
}

}  // namespace

SimulationReport simulate_groups(const SimulationConfig & config) {
    check_probability(config.p_perception_ok, "p_perception_ok");
    check_probability(config.p_reasoning_ok_given_perception, "p_reasoning_ok_given_perception");
    check_probability(config.pv_false_negative_rate, "pv_false_negative_rate");
    check_probability(config.pv_false_positive_rate, "pv_false_positive_rate");
    if (config.group_size < 2) {
        throw Error(ErrorCode::GroupTooSmall, "simulated groups need k >= 2");
    }

    std::mt19937_64                        rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SimulationReport report;
    report.seed       = config.seed;
    report.groups     = config.groups;
    report.group_size = config.group_size;
    report.case_counts = { { "success", 0 },
                           { "bad_thinking", 0 },
                           { "bad_seeing", 0 },
                           { "failed_no_perception_info", 0 } };

    double sum_abs_base = 0.0;
    double sum_moca     = 0.0;
    double sum_grpo     = 0.0;

    std::vector<double> returns(config.group_size);
    std::vector<bool>   perc_ok(config.group_size);
    std::vector<bool>   outcome_ok(config.group_size);
    std::vector<int>    observed_rp(config.group_size);

    for (int g = 0; g < config.groups; ++g) {
        for (int i = 0; i < config.group_size; ++i) {
            perc_ok[i]    = unit(rng) < config.p_perception_ok;
            bool reas_ok  = unit(rng) < config.p_reasoning_ok_given_perception;
            outcome_ok[i] = perc_ok[i] && reas_ok;

            // PV observation: the truth flipped at the configured noise rates
            double flip    = unit(rng);
            observed_rp[i] = perc_ok[i] ? (flip < config.pv_false_negative_rate ? 0 : 1)
                                        : (flip < config.pv_false_positive_rate ? 1 : 0);

            double r_o = outcome_ok[i] ? 1.0 : 0.0;
            returns[i] = trajectory_return(r_o, observed_rp[i], config.moca);
        }

        std::vector<double> bases = group_base_advantages(returns, config.moca);

        for (int i = 0; i < config.group_size; ++i) {
            ++report.trajectories;
            CaseLabel label = outcome_ok[i]
                                  ? CaseLabel::Success
                                  : (observed_rp[i] == 1 ? CaseLabel::BadThinking
                                                         : CaseLabel::BadSeeing);
            ++report.case_counts[case_label_name(label)];

            if (outcome_ok[i] || !perc_ok[i]) continue;

            // failed trajectory whose perception was truly correct
            double base = bases[i];
            double moca = observed_rp[i] == 1
                              ? base + config.moca.alpha_protect * std::fabs(base)
                              : base - config.moca.alpha_punish * std::fabs(base);
            ++report.conditioned_n;
            sum_abs_base += std::fabs(base);
            sum_moca += moca;
            sum_grpo += base;
        }
    }

    if (report.conditioned_n > 0) {
        double n = static_cast<double>(report.conditioned_n);
        report.conditioned_mean_abs_base = sum_abs_base / n;
        report.moca_mean_perception_adv  = sum_moca / n;
        report.grpo_mean_perception_adv  = sum_grpo / n;
        report.gap = report.moca_mean_perception_adv - report.grpo_mean_perception_adv;
    }
    return report;
}

}  // namespace moca
