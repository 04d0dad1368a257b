// Builds the bundled replay fixtures: a 4-trajectory group with token
// offsets, a small PV audit set, the matching cassettes, and the replay
// config. The fake transport answers proxy prompts from a marker table and
// grades judge prompts by whole-word containment of the gold answer, so the
// recorded completions are deterministic.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "moca/harness.h"
#include "moca/report.h"
#include "moca/text_util.h"

using json = nlohmann::json;

namespace {

const char * kQuestion =
    "Which of the following company logos does not appear in the slides? "
    "Facebook, AWS, Cargo and Manta.";

struct ProxyRule {
    const char * marker;  // substring of the evidence
    const char * reply;
};

const ProxyRule kProxyRules[] = {
    { "but no AWS logo anywhere",
      "The observations state that Facebook, Cargo and Manta were found and that no AWS logo "
      "appears.\n\\boxed{AWS}" },
    { "many small company logos in a grid",
      "The observations do not name the logos, so I cannot rule any option out.\n"
      "\\boxed{Manta}" },
    { "a Facebook logo in the corner",
      "Only a Facebook logo is described, so I can only guess among the rest.\n"
      "\\boxed{Facebook}" },
    { "The car in the photo is red", "The observations name the color directly.\n\\boxed{red}" },
    { "four chairs around the table", "Four chairs are described.\n\\boxed{4}" },
    { "the usual traffic instruction",
      "The observations hint at a traffic sign but never quote it.\n\\boxed{YIELD}" },
    { "A laptop sits on the desk", "No brand is described.\n\\boxed{Dell}" },
    { "A scoreboard is partially visible", "The score is not readable.\n\\boxed{Eagles}" },
    { "a clock on the wall", "No time is stated, but clocks in such photos read\n\\boxed{3:15}" },
};

std::string extract_between(const std::string & s, const std::string & from, const std::string & to) {
    size_t b = s.find(from);
    if (b == std::string::npos) return "";
    b += from.size();
    size_t e = s.find(to, b);
    if (e == std::string::npos) e = s.size();
    return s.substr(b, e - b);
}

class FakeTransport : public moca::Transport {
  public:
    Response post(const moca::ClientConfig &, const std::string & json_body) override {
        calls_.fetch_add(1);
        json        body    = json::parse(json_body);
        std::string content = body["messages"][0]["content"].get<std::string>();

        std::string reply;
        if (content.find("image you cannot see") != std::string::npos) {
            reply = "I cannot tell from the observations.\n\\boxed{unknown}";
            for (const ProxyRule & rule : kProxyRules) {
                if (content.find(rule.marker) != std::string::npos) {
                    reply = rule.reply;
                    break;
                }
            }
        } else {
            std::string gold = extract_between(content, "Ground Truth Answer: ", "\nModel Response:");
            std::string pred = extract_between(content, "Model Response: ", "\n\n## EVALUATION");
            bool match = moca::text::whole_word_contains(moca::text::normalize_answer(pred),
                                                         moca::text::normalize_answer(gold));
            reply = std::string("Ground Truth Type: [B]\nBoxed content found: ") +
                    (moca::text::last_boxed(pred) ? moca::text::last_boxed(pred)->c_str() : "None") +
                    "\nMatch status: " + (match ? "Exact match" : "No match") +
                    "\nConclusion: graded by containment.\n\\boxed{" + (match ? "1.0" : "0.0") +
                    "}";
        }
        json response = { { "choices", { { { "message", { { "content", reply } } } } } } };
        return { 200, response.dump(), "" };
    }
};

json word_token_offsets(const std::string & raw) {
    json offsets = json::array();
    int  index   = 0;
    size_t i = 0;
    while (i < raw.size()) {
        while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
        if (i >= raw.size()) break;
        size_t begin = i;
        while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
        offsets.push_back({ index++, begin, i });
    }
    return offsets;
}

void write_group_file(const std::string & path) {
    struct Spec {
        const char * id;
        std::string  raw;
    };

    const std::string evidence_good =
        "Scanning the slides, I can find the Facebook, Cargo and Manta logos, but no AWS logo "
        "anywhere.";

    std::vector<Spec> specs = {
        { "t1",
          "<think>Check each candidate logo against every slide.</think>\n<recognition>" +
              evidence_good +
              "</recognition>\n<think>Three of the four appear, so the missing logo is "
              "AWS.</think>\n<answer>\\boxed{AWS}</answer>" },
        { "t2",
          "<think>I should compare the listed companies with the slides.</think>\n<recognition>The "
          "slides show many small company logos in a grid.</recognition>\n<think>One of the four "
          "options must be absent, I will go with AWS.</think>\n<answer>\\boxed{AWS}</answer>" },
        { "t3",
          "<recognition>" + evidence_good +
              "</recognition>\n<think>The question asks which one appears, so the answer is the "
              "one I saw first.</think>\n<answer>\\boxed{Manta}</answer>" },
        { "t4",
          "<recognition>The first slide shows a Facebook logo in the "
          "corner.</recognition>\n<think>Facebook is present, so the missing logo is probably "
          "Cargo.</think>\n<answer>\\boxed{Cargo}</answer>" },
    };

    std::ofstream out(path, std::ios::binary);
    for (const Spec & spec : specs) {
        json j = { { "trajectory_id", spec.id },
                   { "group_id", "g1" },
                   { "question", kQuestion },
                   { "gold_answer", "AWS" },
                   { "image_ref", "slides_deck_001.png" },
                   { "raw", spec.raw },
                   { "token_offsets", word_token_offsets(spec.raw) } };
        out << j.dump() << '\n';
    }
}

void write_audit_file(const std::string & path) {
    struct Item {
        const char * question;
        const char * perception;
        const char * gold;
        bool         sufficient;
    };
    const Item items[] = {
        { "What color is the car?", "The car in the photo is red.", "red", true },
        { "How many chairs are visible?", "There are four chairs around the table.", "4", true },
        { "What is written on the sign?",
          "The octagonal sign carries the usual traffic instruction.", "STOP", true },
        { "What brand is the laptop?", "A laptop sits on the desk.", "Apple", false },
        { "Which team won the match?", "A scoreboard is partially visible.", "Falcons", false },
        { "What time does the clock show?", "There is a clock on the wall.", "3:15", false },
    };
    std::ofstream out(path, std::ios::binary);
    for (const Item & item : items) {
        json j = { { "question", item.question },
                   { "perception_text", item.perception },
                   { "gold_answer", item.gold },
                   { "human_label", item.sufficient ? "Sufficient" : "Insufficient" } };
        out << j.dump() << '\n';
    }
}

void write_config_file(const std::string & path) {
    json j = {
        { "moca",
          { { "lambda", 0.3 },
            { "alpha_protect", 0.2 },
            { "alpha_punish", 0.2 },
            { "outcome_weight", 1.0 },
            { "pass_threshold", 0.5 },
            { "binarize_return", false },
            { "std_normalize", false },
            { "length_penalty", 0.3 } } },
        { "judge",
          { { "temperature", 0.0 },
            { "runs", 1 },
            { "pass_threshold", 0.5 },
            { "aggregation", "single" } } },
        { "pv", { { "unit_budget", 800 }, { "penalty_mode", "gate" } } },
        { "client",
          { { "endpoint_url", "http://localhost:9" },
            { "model", "fixture-judge" },
            { "auth_token_env", "" },
            { "max_retries", 0 },
            { "backoff_base_ms", 1 },
            { "timeout_ms", 1000 },
            { "max_in_flight", 1 } } },
        { "verify_mode", "svv_always" },
        { "strict_parse", true },
    };
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char ** argv) {
    std::string dir = argc > 1 ? argv[1] : "data/fixtures";
    std::filesystem::create_directories(dir);

    write_group_file(dir + "/group4.jsonl");
    write_audit_file(dir + "/pv_audit.jsonl");
    write_config_file(dir + "/config_replay.json");

    moca::EngineConfig config = moca::EngineConfig::from_json_file(dir + "/config_replay.json");

    // record the group cassette by scoring against the fake transport
    {
        FakeTransport      transport;
        moca::ReplayCassette cassette(moca::CassetteMode::Record);
        moca::OracleClient client(config.client, &transport, &cassette);
        auto groups = moca::ingest_trajectories(dir + "/group4.jsonl", config.strict_parse);
        auto result = moca::score_batch(groups, client, client, config);
        cassette.save(dir + "/group4_cassette.jsonl");
        std::printf("group cassette: %zu entries, %lld errors\n", cassette.size(),
                    static_cast<long long>(result.manifest.errors));
        for (const auto & st : result.scored) {
            std::printf("  %s: r_o=%.2f r_p=%d return=%.2f\n", st.record.trajectory_id.c_str(),
                        st.record.r_o_score, st.record.r_p, st.record.return_value);
        }
    }

    // record the PV audit cassette
    {
        FakeTransport      transport;
        moca::ReplayCassette cassette(moca::CassetteMode::Record);
        moca::OracleClient client(config.client, &transport, &cassette);
        auto items = moca::load_pv_audit(dir + "/pv_audit.jsonl");
        auto stats = moca::pv_agreement_audit(items, client, client, config.pv);
        cassette.save(dir + "/pv_audit_cassette.jsonl");
        std::printf("audit cassette: %zu entries\n%s", cassette.size(),
                    moca::format_agreement_table(stats).c_str());
    }
    return 0;
}
