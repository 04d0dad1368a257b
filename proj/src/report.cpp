#include "moca/report.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "moca/errors.h"

namespace moca {
namespace {

using ordered_json = nlohmann::ordered_json;

double round4(double x) {
    return std::round(x * 1e4) / 1e4;
}

std::string percent2(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::ofstream open_out(const std::string & path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write: " + path);
    }
    return out;
}

ordered_json metrics_to_json(const MetricsReport & report) {
    return ordered_json{ { "verifier", report.verifier_name },
                         { "n", report.n },
                         { "accuracy", round4(report.accuracy) },
                         { "precision", round4(report.precision) },
                         { "recall", round4(report.recall) },
                         { "f1", round4(report.f1) },
                         { "consistency", round4(report.consistency) },
                         { "accuracy_percent", percent2(report.accuracy) },
                         { "f1_percent", percent2(report.f1) },
                         { "consistency_percent", percent2(report.consistency) } };
}

}  // namespace

void emit_rewards_jsonl(const std::vector<ScoredTrajectory> & scored, const std::string & path) {
    if (scored.empty()) {
        throw Error(ErrorCode::EmptyList, "no reward records to emit");
    }
    auto out = open_out(path);
    for (const ScoredTrajectory & st : scored) {
        ordered_json j{ { "trajectory_id", st.record.trajectory_id },
                        { "group_id", st.group_id },
                        { "r_o_score", st.record.r_o_score },
                        { "r_o_passed", st.record.r_o_passed },
                        { "r_p", st.record.r_p },
                        { "pv_reason", pv_reason_name(st.pv_reason) },
                        { "penalty_applied", st.record.penalty_applied },
                        { "return_value", st.record.return_value },
                        { "answer_source",
                          st.answer_from_answer_block ? "answer_block" : "trailing_text" } };
        if (!st.error.empty()) j["error"] = st.error;
        out << j.dump() << '\n';
    }
}

void emit_advantages_jsonl(const std::vector<TokenAdvantages> & advantages, const std::string & path) {
    if (advantages.empty()) {
        throw Error(ErrorCode::EmptyList, "no advantages to emit");
    }
    auto out = open_out(path);
    for (const TokenAdvantages & adv : advantages) {
        const char * unit = adv.token_units ? "token" : "char";
        ordered_json spans = ordered_json::array();
        for (const SpanAdvantage & span : adv.spans) {
            spans.push_back({ { "start", span.begin },
                              { "end", span.end },
                              { "unit", unit },
                              { "value", span.value } });
        }
        ordered_json j{ { "trajectory_id", adv.trajectory_id },
                        { "case_label", case_label_name(adv.case_label) },
                        { "base_advantage", adv.base_advantage },
                        { "spans", std::move(spans) } };
        out << j.dump() << '\n';
    }
}

std::string format_metrics_table(const std::vector<MetricsReport> & reports) {
    std::string text = "Verifier            Acc. (%)   F1 (%)    Consistency (%)\n";
    for (const MetricsReport & report : reports) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-18s  %8s  %8s  %8s\n", report.verifier_name.c_str(),
                      percent2(report.accuracy).c_str(), percent2(report.f1).c_str(),
                      percent2(report.consistency).c_str());
        text += line;
    }
    return text;
}

void emit_metrics(const std::vector<MetricsReport> & reports, const std::string & path,
                  ReportFormat format) {
    if (reports.empty()) {
        throw Error(ErrorCode::EmptyList, "no metric reports to emit");
    }
    auto out = open_out(path);
    if (format == ReportFormat::TableText) {
        out << format_metrics_table(reports);
        return;
    }
    for (const MetricsReport & report : reports) {
        out << metrics_to_json(report).dump() << '\n';
    }
}

std::string agreement_to_json(const AgreementStats & stats) {
    ordered_json j{ { "matrix",
                      { { "tp", stats.matrix.tp },
                        { "fp", stats.matrix.fp },
                        { "fn", stats.matrix.fn },
                        { "tn", stats.matrix.tn } } },
                    { "n", stats.matrix.total() },
                    { "accuracy", round4(stats.accuracy) },
                    { "accuracy_percent", percent2(stats.accuracy) },
                    { "kappa", round4(stats.kappa) } };
    return j.dump();
}

std::string format_agreement_table(const AgreementStats & stats) {
    const ConfusionMatrix & m = stats.matrix;
    const double n = static_cast<double>(m.total());
    auto cell = [&](int64_t count) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%lld (%s%%)", static_cast<long long>(count),
                      percent2(static_cast<double>(count) / n).c_str());
        return std::string(buf);
    };
    char text[512];
    std::snprintf(text, sizeof(text),
                  "Oracle vs. human majority confusion matrix (N=%lld)\n"
                  "                      Human Sufficient    Human Insufficient\n"
                  "Oracle Sufficient     %-18s  %-18s\n"
                  "Oracle Insufficient   %-18s  %-18s\n"
                  "Accuracy: %s%%    Cohen's kappa: %.4f\n",
                  static_cast<long long>(m.total()), cell(m.tp).c_str(), cell(m.fp).c_str(),
                  cell(m.fn).c_str(), cell(m.tn).c_str(), percent2(stats.accuracy).c_str(),
                  stats.kappa);
    return text;
}

void emit_agreement(const AgreementStats & stats, const std::string & path, ReportFormat format) {
    if (stats.matrix.total() <= 0) {
        throw Error(ErrorCode::EmptyMatrix, "agreement stats are empty");
    }
    auto out = open_out(path);
    if (format == ReportFormat::TableText) {
        out << format_agreement_table(stats);
    } else {
        out << agreement_to_json(stats) << '\n';
    }
}

std::string simulation_to_json(const SimulationReport & report) {
    ordered_json counts;
    for (const auto & [label, count] : report.case_counts) counts[label] = count;
    ordered_json j{ { "seed", report.seed },
                    { "groups", report.groups },
                    { "group_size", report.group_size },
                    { "trajectories", report.trajectories },
                    { "case_counts", std::move(counts) },
                    { "conditioned_n", report.conditioned_n },
                    { "conditioned_mean_abs_base", report.conditioned_mean_abs_base },
                    { "moca_mean_perception_adv", report.moca_mean_perception_adv },
                    { "grpo_mean_perception_adv", report.grpo_mean_perception_adv },
                    { "gap", report.gap } };
    return j.dump();
}

void emit_simulation(const SimulationReport & report, const std::string & path) {
    if (report.trajectories <= 0) {
        throw Error(ErrorCode::EmptyList, "simulation produced no trajectories");
    }
    auto out = open_out(path);
    out << simulation_to_json(report) << '\n';
}

}  // namespace moca
