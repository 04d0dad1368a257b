#include "moca/harness.h"

#include <atomic>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "moca/errors.h"
#include "moca/text_util.h"

namespace moca {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Aggregation aggregation_from_string(const std::string & s) {
    if (s == "single") return Aggregation::Single;
    if (s == "majority_on_pass") return Aggregation::MajorityOnPass;
    if (s == "median_score") return Aggregation::MedianScore;
    throw Error(ErrorCode::SchemaViolation, "unknown aggregation: " + s);
}

const char * aggregation_name(Aggregation a) {
    switch (a) {
        case Aggregation::Single:         return "single";
        case Aggregation::MajorityOnPass: return "majority_on_pass";
        case Aggregation::MedianScore:    return "median_score";
    }
    return "single";
}

json parse_json_line(const std::string & path, size_t line_no, const std::string & line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::SchemaViolation,
                    path + ":" + std::to_string(line_no) + ": not a JSON object");
    }
    return j;
}

std::string require_string(const json & j, const char * field, const std::string & where) {
    if (!j.contains(field) || !j[field].is_string() || j[field].get<std::string>().empty()) {
        throw Error(ErrorCode::SchemaViolation,
                    where + ": missing or empty field '" + field + "'");
    }
    return j[field].get<std::string>();
}

bool parse_label(const json & value, const std::string & where) {
    if (value.is_boolean()) return value.get<bool>();
    if (value.is_number_integer()) return value.get<int64_t>() != 0;
    if (value.is_string()) {
        std::string s = value.get<std::string>();
        if (s == "Correct" || s == "correct" || s == "Sufficient" || s == "sufficient") return true;
        if (s == "Incorrect" || s == "incorrect" || s == "Insufficient" || s == "insufficient") {
            return false;
        }
    }
    throw Error(ErrorCode::SchemaViolation, where + ": unrecognized label");
}

ChallengeCategory category_from_string(const std::string & s, const std::string & where) {
    if (s == "exact_match") return ChallengeCategory::ExactMatch;
    if (s == "semantic_rephrase") return ChallengeCategory::SemanticRephrase;
    if (s == "subtle_error") return ChallengeCategory::SubtleError;
    if (s == "mixed_fact") return ChallengeCategory::MixedFact;
    throw Error(ErrorCode::SchemaViolation, where + ": unknown category '" + s + "'");
}

// Bounded worker pool; results land at their input index so output order is
// independent of completion order.
void parallel_indexed(size_t n, int max_workers, const std::function<void(size_t)> & fn) {
    int workers = std::min<int>(std::max(max_workers, 1), static_cast<int>(n));
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t>      next{ 0 };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto & t : pool) t.join();
}

}  // namespace

EngineConfig EngineConfig::from_json_file(const std::string & path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, "config file: " + path);
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::SchemaViolation, path + ": not a JSON object");
    }

    EngineConfig cfg;
    if (j.contains("moca")) {
        const json & m = j["moca"];
        cfg.moca.lambda          = m.value("lambda", cfg.moca.lambda);
        cfg.moca.alpha_protect   = m.value("alpha_protect", cfg.moca.alpha_protect);
        cfg.moca.alpha_punish    = m.value("alpha_punish", cfg.moca.alpha_punish);
        cfg.moca.outcome_weight  = m.value("outcome_weight", cfg.moca.outcome_weight);
        cfg.moca.pass_threshold  = m.value("pass_threshold", cfg.moca.pass_threshold);
        cfg.moca.binarize_return = m.value("binarize_return", cfg.moca.binarize_return);
        cfg.moca.std_normalize   = m.value("std_normalize", cfg.moca.std_normalize);
        cfg.moca.length_penalty  = m.value("length_penalty", cfg.moca.length_penalty);
    }
    if (j.contains("judge")) {
        const json & judge = j["judge"];
        cfg.judge.temperature    = judge.value("temperature", cfg.judge.temperature);
        cfg.judge.runs           = judge.value("runs", cfg.judge.runs);
        cfg.judge.pass_threshold = judge.value("pass_threshold", cfg.judge.pass_threshold);
        if (judge.contains("aggregation")) {
            cfg.judge.aggregation = aggregation_from_string(judge["aggregation"].get<std::string>());
        }
    }
    cfg.pv.judge = cfg.judge;
    if (j.contains("pv")) {
        const json & pv = j["pv"];
        cfg.pv.unit_budget = pv.value("unit_budget", cfg.pv.unit_budget);
        if (pv.contains("penalty_mode")) {
            std::string mode = pv["penalty_mode"].get<std::string>();
            if (mode == "gate") {
                cfg.pv.penalty_mode = LengthPenaltyMode::Gate;
            } else if (mode == "additive") {
                cfg.pv.penalty_mode = LengthPenaltyMode::Additive;
            } else {
                throw Error(ErrorCode::SchemaViolation, "unknown pv.penalty_mode: " + mode);
            }
        }
    }
    if (j.contains("client")) {
        const json & c = j["client"];
        cfg.client.endpoint_url    = c.value("endpoint_url", cfg.client.endpoint_url);
        cfg.client.model_name      = c.value("model", cfg.client.model_name);
        cfg.client.auth_token_env  = c.value("auth_token_env", cfg.client.auth_token_env);
        cfg.client.max_retries     = c.value("max_retries", cfg.client.max_retries);
        cfg.client.backoff_base_ms = c.value("backoff_base_ms", cfg.client.backoff_base_ms);
        cfg.client.timeout_ms      = c.value("timeout_ms", cfg.client.timeout_ms);
        cfg.client.max_in_flight   = c.value("max_in_flight", cfg.client.max_in_flight);
    }
    if (j.contains("verify_mode")) {
        std::string mode = j["verify_mode"].get<std::string>();
        if (mode == "svv_always") {
            cfg.verify_mode = VerifyMode::SvvAlways;
        } else if (mode == "svv_first_deterministic") {
            cfg.verify_mode = VerifyMode::SvvFirstDeterministic;
        } else {
            throw Error(ErrorCode::SchemaViolation, "unknown verify_mode: " + mode);
        }
    }
    cfg.strict_parse = j.value("strict_parse", cfg.strict_parse);
    return cfg;
}

std::string EngineConfig::to_json() const {
    ordered_json j;
    j["moca"] = { { "lambda", moca.lambda },
                  { "alpha_protect", moca.alpha_protect },
                  { "alpha_punish", moca.alpha_punish },
                  { "outcome_weight", moca.outcome_weight },
                  { "pass_threshold", moca.pass_threshold },
                  { "binarize_return", moca.binarize_return },
                  { "std_normalize", moca.std_normalize },
                  { "length_penalty", moca.length_penalty } };
    j["judge"] = { { "temperature", judge.temperature },
                   { "runs", judge.runs },
                   { "pass_threshold", judge.pass_threshold },
                   { "aggregation", aggregation_name(judge.aggregation) } };
    j["pv"] = { { "unit_budget", pv.unit_budget },
                { "penalty_mode", pv.penalty_mode == LengthPenaltyMode::Gate ? "gate" : "additive" } };
    j["client"] = { { "endpoint_url", client.endpoint_url },
                    { "model", client.model_name },
                    { "auth_token_env", client.auth_token_env },
                    { "max_retries", client.max_retries },
                    { "backoff_base_ms", client.backoff_base_ms },
                    { "timeout_ms", client.timeout_ms },
                    { "max_in_flight", client.max_in_flight } };
    j["verify_mode"] =
        verify_mode == VerifyMode::SvvAlways ? "svv_always" : "svv_first_deterministic";
    j["strict_parse"] = strict_parse;
    return j.dump();
}

std::vector<TrajectoryGroup> ingest_trajectories(const std::string & path, bool strict_parse) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, "trajectory file: " + path);
    }

    std::vector<TrajectoryGroup>  groups;
    std::map<std::string, size_t> group_index;

    std::string line;
    size_t      line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        std::string where = path + ":" + std::to_string(line_no);
        json        j     = parse_json_line(path, line_no, line);

        TrajectoryInput input;
        input.group_id = require_string(j, "group_id", where);
        std::string trajectory_id = require_string(j, "trajectory_id", where);
        std::string question      = require_string(j, "question", where);
        std::string gold          = require_string(j, "gold_answer", where);
        std::string raw           = require_string(j, "raw", where);
        std::string image_ref     = j.value("image_ref", std::string());

        try {
            input.trajectory = parse_trajectory(raw, question, gold, image_ref, strict_parse,
                                                trajectory_id);
        } catch (const Error & e) {
            throw Error(ErrorCode::SchemaViolation, where + ": " + e.what());
        }

        if (j.contains("token_offsets")) {
            if (!j["token_offsets"].is_array()) {
                throw Error(ErrorCode::SchemaViolation, where + ": token_offsets must be an array");
            }
            for (const json & t : j["token_offsets"]) {
                if (!t.is_array() || t.size() != 3) {
                    throw Error(ErrorCode::SchemaViolation,
                                where + ": token offset entries must be [index, begin, end]");
                }
                input.token_offsets.push_back(
                    { t[0].get<int>(), t[1].get<size_t>(), t[2].get<size_t>() });
            }
        }

        auto [it, inserted] = group_index.try_emplace(input.group_id, groups.size());
        if (inserted) {
            groups.push_back({ input.group_id, {} });
        }
        groups[it->second].members.push_back(std::move(input));
    }
    return groups;
}

std::string RunManifest::to_json() const {
    ordered_json j;
    j["trajectories"]     = trajectories;
    j["groups"]           = groups;
    j["errors"]           = errors;
    j["answer_fallbacks"] = answer_fallbacks;
    ordered_json counts;
    for (const auto & [label, count] : case_counts) counts[label] = count;
    j["case_counts"] = counts;
    j["config"]      = json::parse(config_json);
    return j.dump();
}

BatchResult score_batch(const std::vector<TrajectoryGroup> & groups,
                        Oracle &                             judge_oracle,
                        Oracle &                             proxy_oracle,
                        const EngineConfig &                 config) {
    struct Slot {
        size_t           group = 0;
        const TrajectoryInput * input = nullptr;
    };
    std::vector<Slot> slots;
    for (size_t g = 0; g < groups.size(); ++g) {
        for (const TrajectoryInput & input : groups[g].members) {
            slots.push_back({ g, &input });
        }
    }

    BatchResult result;
    result.scored.resize(slots.size());
    result.manifest.config_json = config.to_json();
    result.manifest.trajectories = static_cast<int64_t>(slots.size());
    result.manifest.groups       = static_cast<int64_t>(groups.size());

    const bool additive = config.pv.penalty_mode == LengthPenaltyMode::Additive;

    parallel_indexed(slots.size(), config.client.max_in_flight, [&](size_t i) {
        const Trajectory & traj = slots[i].input->trajectory;
        ScoredTrajectory & st   = result.scored[i];
        st.group_id             = slots[i].input->group_id;
        st.record.trajectory_id = traj.trajectory_id;
        try {
            bool        from_answer = false;
            std::string answer      = extract_final_answer_text(traj, &from_answer);
            st.answer_from_answer_block = from_answer;

            std::optional<std::string> question;
            if (!traj.question.empty()) question = traj.question;
            OutcomeResult outcome = verify_outcome(answer, traj.gold_answer, question,
                                                   &judge_oracle, config.judge, config.verify_mode);
            PvResult pv = verify_perception(traj, proxy_oracle, judge_oracle, config.pv);

            st.pv_reason          = pv.reason;
            st.record.r_o_score   = outcome.score;
            st.record.r_o_passed  = outcome.passed;
            st.record.r_p         = pv.r_p;
            st.record.penalty_applied = pv.penalty_applied;
            if (additive && has_perception(traj)) {
                st.record.penalty_applied =
                    perception_payload(traj, config.pv.unit_budget, config.pv.counter).over_budget;
            }
            st.record.return_value =
                trajectory_return(st.record.r_o_score, st.record.r_p, config.moca);
            if (additive && st.record.penalty_applied) {
                st.record.return_value -= config.moca.length_penalty;
            }
        } catch (const std::exception & e) {
            st.error = e.what();
        }
    });

    // group-level advantage assembly over clean groups only
    size_t cursor = 0;
    for (const TrajectoryGroup & group : groups) {
        size_t begin = cursor;
        size_t end   = cursor + group.members.size();
        cursor       = end;

        bool clean = group.members.size() >= 2;
        for (size_t i = begin; i < end && clean; ++i) {
            clean = result.scored[i].error.empty();
        }
        if (!clean) continue;

        std::vector<RewardRecord> records;
        std::vector<SpanMap>      span_maps;
        for (size_t i = begin; i < end; ++i) {
            const TrajectoryInput & input = *slots[i].input;
            records.push_back(result.scored[i].record);
            span_maps.push_back(input.token_offsets.empty()
                                    ? char_span_map(input.trajectory)
                                    : map_block_spans(input.trajectory, input.token_offsets));
        }
        auto advantages = assemble_records(records, span_maps, config.moca);
        for (auto & adv : advantages) {
            ++result.manifest.case_counts[case_label_name(adv.case_label)];
            result.advantages.push_back(std::move(adv));
        }
    }

    for (const ScoredTrajectory & st : result.scored) {
        if (!st.error.empty()) ++result.manifest.errors;
        if (st.error.empty() && !st.answer_from_answer_block) ++result.manifest.answer_fallbacks;
    }
    return result;
}

std::vector<ChallengeItem> load_challenge_set(const std::string & path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, "challenge set: " + path);
    }
    std::vector<ChallengeItem> items;
    std::string line;
    size_t      line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        std::string where = path + ":" + std::to_string(line_no);
        json        j     = parse_json_line(path, line_no, line);

        ChallengeItem item;
        item.model_answer = require_string(j, "model_answer", where);
        item.gold_answer  = require_string(j, "gold_answer", where);
        if (j.contains("question") && j["question"].is_string() &&
            !j["question"].get<std::string>().empty()) {
            item.question = j["question"].get<std::string>();
        }
        if (!j.contains("human_label")) {
            throw Error(ErrorCode::SchemaViolation, where + ": missing field 'human_label'");
        }
        item.human_label = parse_label(j["human_label"], where);
        if (j.contains("category")) {
            item.category = category_from_string(j["category"].get<std::string>(), where);
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<PvAuditItem> load_pv_audit(const std::string & path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, "pv audit file: " + path);
    }
    std::vector<PvAuditItem> items;
    std::string line;
    size_t      line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        std::string where = path + ":" + std::to_string(line_no);
        json        j     = parse_json_line(path, line_no, line);

        PvAuditItem item;
        item.question        = require_string(j, "question", where);
        item.gold_answer     = require_string(j, "gold_answer", where);
        item.perception_text = j.value("perception_text", std::string());
        if (!j.contains("human_label")) {
            throw Error(ErrorCode::SchemaViolation, where + ": missing field 'human_label'");
        }
        item.human_label = parse_label(j["human_label"], where);
        items.push_back(std::move(item));
    }
    return items;
}

MetricsReport evaluate_verifier(const std::vector<ChallengeItem> & challenge_set,
                                VerifierKind                       kind,
                                Oracle *                           oracle,
                                const JudgeParams &                params) {
    if (challenge_set.empty()) {
        throw Error(ErrorCode::EmptyList, "challenge set is empty");
    }

    std::vector<bool> predictions;
    std::vector<bool> labels;
    std::vector<bool> consistent;
    predictions.reserve(challenge_set.size());

    for (const ChallengeItem & item : challenge_set) {
        OutcomeResult result;
        switch (kind) {
            case VerifierKind::RigidRule: {
                // pure, but evaluated through the same K-run path as the others
                std::vector<Verdict> verdicts;
                for (int run = 0; run < params.runs; ++run) {
                    verdicts.push_back(rigid_rule_verify(item.model_answer, item.gold_answer));
                }
                int passes = 0;
                for (const Verdict & v : verdicts) {
                    if (v.score >= params.pass_threshold) ++passes;
                }
                result.verdicts = std::move(verdicts);
                result.score    = result.verdicts.front().score;
                result.passed   = params.aggregation == Aggregation::MajorityOnPass
                                      ? 2 * passes > params.runs
                                      : result.score >= params.pass_threshold;
                if (params.runs > 1) {
                    result.consistency =
                        (passes == 0 || passes == static_cast<int>(result.verdicts.size())) ? 1.0
                                                                                            : 0.0;
                }
                break;
            }
            case VerifierKind::NaivePrompt:
                if (oracle == nullptr) {
                    throw Error(ErrorCode::OracleUnavailable, "naive verifier needs an oracle");
                }
                result = naive_judge_verify(item.model_answer, item.gold_answer, *oracle, params);
                break;
            case VerifierKind::Svv:
                result = verify_outcome(item.model_answer, item.gold_answer, item.question, oracle,
                                        params, VerifyMode::SvvAlways);
                break;
        }
        predictions.push_back(result.passed);
        labels.push_back(item.human_label);
        consistent.push_back(result.consistency.value_or(1.0) == 1.0);
    }

    MetricsReport report = classification_metrics(predictions, labels);
    report.consistency   = consistency_rate(consistent);
    switch (kind) {
        case VerifierKind::RigidRule:   report.verifier_name = "rigid_rule"; break;
        case VerifierKind::NaivePrompt: report.verifier_name = "naive_prompt"; break;
        case VerifierKind::Svv:         report.verifier_name = "svv"; break;
    }
    return report;
}

std::vector<MetricsReport> evaluate_verifiers(const std::vector<ChallengeItem> & challenge_set,
                                              Oracle &                           oracle,
                                              const JudgeParams &                params) {
    return {
        evaluate_verifier(challenge_set, VerifierKind::RigidRule, nullptr, params),
        evaluate_verifier(challenge_set, VerifierKind::NaivePrompt, &oracle, params),
        evaluate_verifier(challenge_set, VerifierKind::Svv, &oracle, params),
    };
}

}  // namespace moca
