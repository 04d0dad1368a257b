#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace moca {

// <recognition> blocks ground visual facts, <think> blocks reason over them,
// <answer> holds the final answer. Anything outside recognized tags is Other.
enum class BlockKind { Perception, Reasoning, Answer, Other };

const char * block_kind_name(BlockKind kind);

struct Block {
    BlockKind   kind = BlockKind::Other;
    std::string text;            // inner content, tags excluded (raw slice for Other)
    size_t      span_begin = 0;  // half-open char span over raw, tags included
    size_t      span_end   = 0;
};

struct Trajectory {
    std::string        raw;
    std::vector<Block> blocks;
    std::string        question;
    std::string        gold_answer;
    std::string        image_ref;  // opaque identifier; this engine never reads pixels
    std::string        trajectory_id;
};

// Splits raw into tagged blocks plus Other gaps. Block spans tile [0, raw.size())
// exactly. Inner tags are literal text of the enclosing block. An opening tag
// with no matching close is an error in strict mode; in lenient mode the region
// from the tag to the end of input becomes an Other block.
Trajectory parse_trajectory(std::string raw,
                            std::string question,
                            std::string gold_answer,
                            std::string image_ref,
                            bool        strict,
                            std::string trajectory_id = "");

// Byte-identical inverse of parse_trajectory.
std::string reconstruct(const Trajectory & traj);

using UnitCounter = std::function<int(const std::string &)>;

int whitespace_word_count(const std::string & text);

struct PerceptionPayload {
    std::string evidence_text;
    int         unit_count  = 0;
    bool        over_budget = false;
};

// Concatenates Perception block texts (in order, newline-joined). The counter
// is pluggable so trainers can inject their own tokenizer; the default counts
// whitespace-separated words.
PerceptionPayload perception_payload(const Trajectory &  traj,
                                     int                 unit_budget,
                                     const UnitCounter & counter = nullptr);

bool has_perception(const Trajectory & traj);

// Final-answer extraction: last Answer block wins; trajectories without an
// Answer block fall back to the trailing untagged text (flagged via
// from_answer_block).
std::string extract_final_answer_text(const Trajectory & traj, bool * from_answer_block = nullptr);

struct TokenOffset {
    int    token_index = 0;
    size_t char_begin  = 0;
    size_t char_end    = 0;
};

struct IndexRange {
    int begin = 0;
    int end   = 0;  // half-open

    bool empty() const { return begin >= end; }
    int  size() const { return end > begin ? end - begin : 0; }
};

struct SpanMap {
    std::string             trajectory_id;
    bool                    token_units = false;  // false: char-range fallback
    IndexRange              total;                // overall covered index range
    std::vector<IndexRange> block_ranges;         // aligned with Trajectory::blocks
    std::vector<BlockKind>  block_kinds;          // aligned with block_ranges

    bool has_perception_range() const;
};

// Maps caller-supplied tokenizer offsets onto block index ranges. A token
// belongs to the block whose char span contains its char_begin, so tokens
// straddling a tag boundary land in the block that owns their first byte.
SpanMap map_block_spans(const Trajectory & traj, const std::vector<TokenOffset> & token_offsets);

// Fallback when no tokenizer offsets exist: ranges are character spans.
SpanMap char_span_map(const Trajectory & traj);

}  // namespace moca
