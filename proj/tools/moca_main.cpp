#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "moca/errors.h"
#include "moca/harness.h"
#include "moca/report.h"
#include "moca/simulate.h"

namespace {

using json = nlohmann::json;

struct OracleSetup {
    std::unique_ptr<moca::ReplayCassette> cassette;
    std::unique_ptr<moca::HttpTransport>  transport;
    std::unique_ptr<moca::OracleClient>   client;
    moca::CassetteMode                    mode = moca::CassetteMode::Passthrough;
    std::string                           cassette_path;

    moca::Oracle & oracle() { return *client; }

    void finish() {
        if (cassette && mode == moca::CassetteMode::Record) {
            cassette->save(cassette_path);
        }
    }
};

moca::CassetteMode parse_mode(const std::string & mode) {
    if (mode == "replay") return moca::CassetteMode::Replay;
    if (mode == "record") return moca::CassetteMode::Record;
    if (mode == "live") return moca::CassetteMode::Passthrough;
    throw moca::Error(moca::ErrorCode::SchemaViolation, "unknown mode: " + mode);
}

OracleSetup make_oracles(const moca::EngineConfig & config, const std::string & cassette_path,
                         const std::string & mode_name) {
    OracleSetup setup;
    setup.mode          = parse_mode(mode_name);
    setup.cassette_path = cassette_path;

    if (setup.mode != moca::CassetteMode::Passthrough) {
        if (cassette_path.empty()) {
            throw moca::Error(moca::ErrorCode::SchemaViolation,
                              "--cassette is required in replay/record mode");
        }
        if (setup.mode == moca::CassetteMode::Replay) {
            setup.cassette = std::make_unique<moca::ReplayCassette>(
                moca::ReplayCassette::load(cassette_path, moca::CassetteMode::Replay));
        } else {
            std::ifstream probe(cassette_path);
            setup.cassette = std::make_unique<moca::ReplayCassette>(
                probe ? moca::ReplayCassette::load(cassette_path, moca::CassetteMode::Record)
                      : moca::ReplayCassette(moca::CassetteMode::Record));
        }
    }
    if (setup.mode != moca::CassetteMode::Replay) {
        setup.transport = std::make_unique<moca::HttpTransport>();
    }
    setup.client = std::make_unique<moca::OracleClient>(config.client, setup.transport.get(),
                                                        setup.cassette.get());
    return setup;
}

moca::EngineConfig load_config(const std::string & path) {
    if (path.empty()) return moca::EngineConfig{};
    return moca::EngineConfig::from_json_file(path);
}

int cmd_score(const std::string & input, const std::string & config_path,
              const std::string & cassette, const std::string & mode, const std::string & out,
              const std::string & advantages_out, std::string manifest_out) {
    moca::EngineConfig config = load_config(config_path);
    auto               groups = moca::ingest_trajectories(input, config.strict_parse);
    OracleSetup        setup  = make_oracles(config, cassette, mode);

    moca::BatchResult result = moca::score_batch(groups, setup.oracle(), setup.oracle(), config);
    setup.finish();

    moca::emit_rewards_jsonl(result.scored, out);
    if (!advantages_out.empty()) {
        moca::emit_advantages_jsonl(result.advantages, advantages_out);
    }
    if (manifest_out.empty()) manifest_out = out + ".manifest.json";
    std::ofstream manifest(manifest_out, std::ios::binary);
    manifest << result.manifest.to_json() << '\n';

    std::printf("scored %lld trajectories in %lld groups (%lld errors)\n",
                static_cast<long long>(result.manifest.trajectories),
                static_cast<long long>(result.manifest.groups),
                static_cast<long long>(result.manifest.errors));
    return result.manifest.errors == 0 ? 0 : 3;
}

int cmd_advantage(const std::string & rewards_path, const std::string & spans_path,
                  const std::string & config_path, const std::string & out) {
    moca::EngineConfig config = load_config(config_path);

    // span maps keyed by trajectory id
    std::map<std::string, moca::SpanMap> span_maps;
    {
        std::ifstream in(spans_path);
        if (!in) throw moca::Error(moca::ErrorCode::FileNotFound, "spans file: " + spans_path);
        std::string line;
        size_t      line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("trajectory_id")) {
                throw moca::Error(moca::ErrorCode::SchemaViolation,
                                  spans_path + ":" + std::to_string(line_no));
            }
            moca::SpanMap map;
            map.trajectory_id = j["trajectory_id"].get<std::string>();
            map.token_units   = j.value("unit", std::string("token")) == "token";
            if (j.contains("total") && j["total"].is_array() && j["total"].size() == 2) {
                map.total = { j["total"][0].get<int>(), j["total"][1].get<int>() };
            }
            for (const json & span : j.value("perception", json::array())) {
                if (!span.is_array() || span.size() != 2) {
                    throw moca::Error(moca::ErrorCode::SchemaViolation,
                                      spans_path + ":" + std::to_string(line_no) +
                                          ": perception spans must be [start, end]");
                }
                map.block_ranges.push_back({ span[0].get<int>(), span[1].get<int>() });
                map.block_kinds.push_back(moca::BlockKind::Perception);
            }
            span_maps[map.trajectory_id] = std::move(map);
        }
    }

    // reward records grouped in file order
    std::vector<std::string>                                  group_order;
    std::map<std::string, std::vector<moca::RewardRecord>>    group_records;
    {
        std::ifstream in(rewards_path);
        if (!in) throw moca::Error(moca::ErrorCode::FileNotFound, "rewards file: " + rewards_path);
        std::string line;
        size_t      line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("trajectory_id") || !j.contains("group_id") ||
                !j.contains("return_value")) {
                throw moca::Error(moca::ErrorCode::SchemaViolation,
                                  rewards_path + ":" + std::to_string(line_no));
            }
            moca::RewardRecord record;
            record.trajectory_id   = j["trajectory_id"].get<std::string>();
            record.r_o_score       = j.value("r_o_score", 0.0);
            record.r_o_passed      = j.value("r_o_passed", false);
            record.r_p             = j.value("r_p", 0);
            record.penalty_applied = j.value("penalty_applied", false);
            record.return_value    = j["return_value"].get<double>();
            std::string group_id   = j["group_id"].get<std::string>();
            if (!group_records.count(group_id)) group_order.push_back(group_id);
            group_records[group_id].push_back(std::move(record));
        }
    }

    std::vector<moca::TokenAdvantages> all;
    for (const std::string & group_id : group_order) {
        const auto &                 records = group_records[group_id];
        std::vector<moca::SpanMap>   maps;
        for (const moca::RewardRecord & record : records) {
            auto it = span_maps.find(record.trajectory_id);
            if (it == span_maps.end()) {
                throw moca::Error(moca::ErrorCode::AlignmentError,
                                  "no span map for trajectory " + record.trajectory_id);
            }
            maps.push_back(it->second);
        }
        for (auto & adv : moca::assemble_records(records, maps, config.moca)) {
            all.push_back(std::move(adv));
        }
    }
    moca::emit_advantages_jsonl(all, out);
    std::printf("recomputed advantages for %zu trajectories\n", all.size());
    return 0;
}

int cmd_evaluate(const std::string & set_path, const std::string & verifier, int runs,
                 double temperature, const std::string & config_path, const std::string & cassette,
                 const std::string & mode, const std::string & out, const std::string & format) {
    moca::EngineConfig config = load_config(config_path);
    moca::JudgeParams  params = config.judge;
    params.runs               = runs;
    params.temperature        = temperature;
    params.aggregation        = runs > 1 ? moca::Aggregation::MajorityOnPass
                                         : moca::Aggregation::Single;

    auto items = moca::load_challenge_set(set_path);

    std::vector<moca::MetricsReport> reports;
    if (verifier == "rigid") {
        reports.push_back(
            moca::evaluate_verifier(items, moca::VerifierKind::RigidRule, nullptr, params));
    } else {
        OracleSetup setup = make_oracles(config, cassette, mode);
        auto        kind  = verifier == "naive" ? moca::VerifierKind::NaivePrompt
                                                : moca::VerifierKind::Svv;
        reports.push_back(moca::evaluate_verifier(items, kind, &setup.oracle(), params));
        setup.finish();
    }

    moca::emit_metrics(reports, out,
                       format == "table" ? moca::ReportFormat::TableText
                                         : moca::ReportFormat::Jsonl);
    std::printf("%s", moca::format_metrics_table(reports).c_str());
    return 0;
}

int cmd_agreement(const std::string & matrix_arg, const std::string & audit_path,
                  const std::string & config_path, const std::string & cassette,
                  const std::string & mode, const std::string & out, const std::string & format) {
    moca::AgreementStats stats;
    if (!matrix_arg.empty()) {
        long long tp, fp, fn, tn;
        if (std::sscanf(matrix_arg.c_str(), "%lld,%lld,%lld,%lld", &tp, &fp, &fn, &tn) != 4) {
            throw moca::Error(moca::ErrorCode::SchemaViolation,
                              "--matrix expects tp,fp,fn,tn counts");
        }
        stats = moca::cohen_kappa({ tp, fp, fn, tn });
    } else if (!audit_path.empty()) {
        moca::EngineConfig config = load_config(config_path);
        auto               items  = moca::load_pv_audit(audit_path);
        OracleSetup        setup  = make_oracles(config, cassette, mode);
        stats = moca::pv_agreement_audit(items, setup.oracle(), setup.oracle(), config.pv);
        setup.finish();
    } else {
        throw moca::Error(moca::ErrorCode::SchemaViolation,
                          "agreement needs --matrix or --audit");
    }

    if (!out.empty()) {
        moca::emit_agreement(stats, out,
                             format == "table" ? moca::ReportFormat::TableText
                                               : moca::ReportFormat::Jsonl);
    }
    std::printf("%s", moca::format_agreement_table(stats).c_str());
    return 0;
}

int cmd_simulate(std::optional<uint64_t> seed, std::optional<int> groups,
                 const std::string & config_path, const std::string & out) {
    moca::SimulationConfig config;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw moca::Error(moca::ErrorCode::FileNotFound, "sim config: " + config_path);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw moca::Error(moca::ErrorCode::SchemaViolation, config_path);
        }
        config.seed       = j.value("seed", config.seed);
        config.groups     = j.value("groups", config.groups);
        config.group_size = j.value("group_size", config.group_size);
        config.p_perception_ok = j.value("p_perception_ok", config.p_perception_ok);
        config.p_reasoning_ok_given_perception =
            j.value("p_reasoning_ok_given_perception", config.p_reasoning_ok_given_perception);
        config.pv_false_negative_rate =
            j.value("pv_false_negative_rate", config.pv_false_negative_rate);
        config.pv_false_positive_rate =
            j.value("pv_false_positive_rate", config.pv_false_positive_rate);
        if (j.contains("moca")) {
            const json & m = j["moca"];
            config.moca.lambda        = m.value("lambda", config.moca.lambda);
            config.moca.alpha_protect = m.value("alpha_protect", config.moca.alpha_protect);
            config.moca.alpha_punish  = m.value("alpha_punish", config.moca.alpha_punish);
        }
    }
    if (seed) config.seed = *seed;
    if (groups) config.groups = *groups;

    moca::SimulationReport report = moca::simulate_groups(config);
    if (!out.empty()) {
        moca::emit_simulation(report, out);
    }
    std::printf("%s\n", moca::simulation_to_json(report).c_str());
    return 0;
}

}  // namespace

int main(int argc, char ** argv) {
    CLI::App app{ "Reward computation and modality-aware credit assignment for interleaved "
                  "perception-reasoning trajectories" };
    app.require_subcommand(1);

    // score
    auto * score = app.add_subcommand("score", "Score a trajectory batch and emit advantages");
    std::string score_input, score_config, score_cassette, score_out, score_adv, score_manifest;
    std::string score_mode = "replay";
    score->add_option("--input", score_input, "trajectory JSONL")->required();
    score->add_option("--config", score_config, "engine config JSON");
    score->add_option("--cassette", score_cassette, "cassette JSONL");
    score->add_option("--mode", score_mode, "replay|record|live");
    score->add_option("--out", score_out, "rewards JSONL output")->required();
    score->add_option("--advantages", score_adv, "advantages JSONL output");
    score->add_option("--manifest", score_manifest, "run manifest output");

    // advantage
    auto * advantage = app.add_subcommand("advantage", "Recompute advantages from stored rewards");
    std::string adv_rewards, adv_spans, adv_config, adv_out;
    advantage->add_option("--rewards", adv_rewards, "rewards JSONL")->required();
    advantage->add_option("--spans", adv_spans, "span maps JSONL")->required();
    advantage->add_option("--config", adv_config, "engine config JSON");
    advantage->add_option("--out", adv_out, "advantages JSONL output")->required();

    // evaluate-verifier
    auto * evaluate = app.add_subcommand("evaluate-verifier", "Run a verifier over a challenge set");
    std::string eval_set, eval_verifier = "svv", eval_config, eval_cassette, eval_out;
    std::string eval_mode = "replay", eval_format = "jsonl";
    int    eval_runs = 1;
    double eval_temperature = 0.0;
    evaluate->add_option("--set", eval_set, "challenge set JSONL")->required();
    evaluate->add_option("--verifier", eval_verifier, "svv|rigid|naive");
    evaluate->add_option("--runs", eval_runs, "judge runs per item");
    evaluate->add_option("--temperature", eval_temperature, "judge temperature");
    evaluate->add_option("--config", eval_config, "engine config JSON");
    evaluate->add_option("--cassette", eval_cassette, "cassette JSONL");
    evaluate->add_option("--mode", eval_mode, "replay|record|live");
    evaluate->add_option("--out", eval_out, "report output")->required();
    evaluate->add_option("--format", eval_format, "jsonl|table");

    // agreement
    auto * agreement = app.add_subcommand("agreement", "Confusion-matrix agreement statistics");
    std::string agr_matrix, agr_audit, agr_config, agr_cassette, agr_out;
    std::string agr_mode = "replay", agr_format = "jsonl";
    agreement->add_option("--matrix", agr_matrix, "tp,fp,fn,tn counts");
    agreement->add_option("--audit", agr_audit, "PV audit JSONL");
    agreement->add_option("--config", agr_config, "engine config JSON");
    agreement->add_option("--cassette", agr_cassette, "cassette JSONL");
    agreement->add_option("--mode", agr_mode, "replay|record|live");
    agreement->add_option("--out", agr_out, "stats output");
    agreement->add_option("--format", agr_format, "jsonl|table");

    // simulate
    auto * simulate = app.add_subcommand("simulate", "Credit-routing simulation");
    std::optional<uint64_t> sim_seed;
    std::optional<int>      sim_groups;
    std::string             sim_config, sim_out;
    simulate->add_option("--seed", sim_seed, "RNG seed");
    simulate->add_option("--groups", sim_groups, "number of groups");
    simulate->add_option("--config", sim_config, "simulation config JSON");
    simulate->add_option("--out", sim_out, "report output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (score->parsed()) {
            return cmd_score(score_input, score_config, score_cassette, score_mode, score_out,
                             score_adv, score_manifest);
        }
        if (advantage->parsed()) {
            return cmd_advantage(adv_rewards, adv_spans, adv_config, adv_out);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(eval_set, eval_verifier, eval_runs, eval_temperature, eval_config,
                                eval_cassette, eval_mode, eval_out, eval_format);
        }
        if (agreement->parsed()) {
            return cmd_agreement(agr_matrix, agr_audit, agr_config, agr_cassette, agr_mode,
                                 agr_out, agr_format);
        }
        if (simulate->parsed()) {
            return cmd_simulate(sim_seed, sim_groups, sim_config, sim_out);
        }
    } catch (const moca::Error & e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return moca::exit_code_for(e.code());
    } catch (const std::exception & e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
