#include "moca/credit.h"

#include <cmath>

#include "moca/errors.h"

namespace moca {
namespace {

// Spans tile the covered range in order; adjacent equal values merge.
void append_span(std::vector<SpanAdvantage> & spans, int begin, int end, double value) {
    if (begin >= end) return;
    if (!spans.empty() && spans.back().end == begin && spans.back().value == value) {
        spans.back().end = end;
        return;
    }
    spans.push_back({ begin, end, value });
}

CaseLabel classify_case(const RewardRecord & record, bool has_perception_range) {
    if (record.r_o_passed) return CaseLabel::Success;
    if (!has_perception_range) return CaseLabel::FailedNoPerceptionInfo;
    return record.r_p == 1 ? CaseLabel::BadThinking : CaseLabel::BadSeeing;
}

}  // namespace

const char * case_label_name(CaseLabel label) {
    switch (label) {
        case CaseLabel::Success:                return "success";
        case CaseLabel::BadThinking:            return "bad_thinking";
        case CaseLabel::BadSeeing:              return "bad_seeing";
        case CaseLabel::FailedNoPerceptionInfo: return "failed_no_perception_info";
    }
    return "success";
}

double trajectory_return(double r_o_score, int r_p, const MocaConfig & config) {
    double r_o = r_o_score;
    if (config.binarize_return) {
        r_o = r_o_score >= config.pass_threshold ? 1.0 : 0.0;
    }
    return config.outcome_weight * r_o + config.lambda * static_cast<double>(r_p);
}

std::vector<double> group_base_advantages(const std::vector<double> & returns,
                                          const MocaConfig &          config) {
    if (returns.size() < 2) {
        throw Error(ErrorCode::GroupTooSmall,
                    "group baseline needs k >= 2, got " + std::to_string(returns.size()));
    }
    double sum = 0.0;
    for (double r : returns) sum += r;
    double mean = sum / static_cast<double>(returns.size());

    std::vector<double> advantages;
    advantages.reserve(returns.size());
    for (double r : returns) advantages.push_back(r - mean);

    if (config.std_normalize) {
        double var = 0.0;
        for (double a : advantages) var += a * a;
        double stddev = std::sqrt(var / static_cast<double>(advantages.size()));
        if (stddev > 0.0) {
            for (double & a : advantages) a /= stddev;
        }
    }
    return advantages;
}

TokenAdvantages moca_token_advantages(double               base_advantage,
                                      const RewardRecord & record,
                                      const SpanMap &      span_map,
                                      const MocaConfig &   config) {
    if (!span_map.trajectory_id.empty() && span_map.trajectory_id != record.trajectory_id) {
        throw Error(ErrorCode::SpanMapMismatch,
                    "span map for " + span_map.trajectory_id + " paired with record " +
                        record.trajectory_id);
    }

    TokenAdvantages out;
    out.trajectory_id  = record.trajectory_id;
    out.base_advantage = base_advantage;
    out.token_units    = span_map.token_units;
    out.case_label     = classify_case(record, span_map.has_perception_range());

    double perception_value = base_advantage;
    if (out.case_label == CaseLabel::BadThinking) {
        perception_value = base_advantage + config.alpha_protect * std::fabs(base_advantage);
    } else if (out.case_label == CaseLabel::BadSeeing) {
        perception_value = base_advantage - config.alpha_punish * std::fabs(base_advantage);
    }

    int cursor = span_map.total.begin;
    for (size_t i = 0; i < span_map.block_ranges.size(); ++i) {
        const IndexRange & range = span_map.block_ranges[i];
        if (range.empty()) continue;
        append_span(out.spans, cursor, range.begin, base_advantage);
        bool is_perception = span_map.block_kinds[i] == BlockKind::Perception;
        append_span(out.spans, range.begin, range.end,
                    is_perception ? perception_value : base_advantage);
        cursor = range.end;
    }
    append_span(out.spans, cursor, span_map.total.end, base_advantage);
    return out;
}

std::vector<TokenAdvantages> assemble_records(const std::vector<RewardRecord> & records,
                                              const std::vector<SpanMap> &      span_maps,
                                              const MocaConfig &                config) {
    if (records.size() != span_maps.size()) {
        throw Error(ErrorCode::AlignmentError, "records and span maps differ in length");
    }
    std::vector<double> returns;
    returns.reserve(records.size());
    for (const RewardRecord & record : records) returns.push_back(record.return_value);

    std::vector<double> bases = group_base_advantages(returns, config);

    std::vector<TokenAdvantages> out;
    out.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        out.push_back(moca_token_advantages(bases[i], records[i], span_maps[i], config));
    }
    return out;
}

std::vector<TokenAdvantages> assemble_group(const GroupSample & group, const MocaConfig & config) {
    const size_t k = group.records.size();
    if (group.trajectories.size() != k || group.span_maps.size() != k) {
        throw Error(ErrorCode::AlignmentError, "group members are not aligned");
    }
    for (size_t i = 0; i < k; ++i) {
        if (group.trajectories[i].trajectory_id != group.records[i].trajectory_id) {
            throw Error(ErrorCode::AlignmentError,
                        "trajectory " + group.trajectories[i].trajectory_id +
                            " misaligned with record " + group.records[i].trajectory_id);
        }
    }
    return assemble_records(group.records, group.span_maps, config);
}

}  // namespace moca
