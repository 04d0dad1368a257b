#include "moca/trajectory.h"

#include <cctype>
#include <cstring>

#include "moca/errors.h"

namespace moca {
namespace {

struct TagSpec {
    BlockKind    kind;
    const char * open;
    const char * close;
};

constexpr TagSpec kTags[] = {
    { BlockKind::Perception, "<recognition>", "</recognition>" },
    { BlockKind::Reasoning,  "<think>",       "</think>"       },
    { BlockKind::Answer,     "<answer>",      "</answer>"      },
};

}  // namespace

const char * block_kind_name(BlockKind kind) {
    switch (kind) {
        case BlockKind::Perception: return "perception";
        case BlockKind::Reasoning:  return "reasoning";
        case BlockKind::Answer:     return "answer";
        case BlockKind::Other:      return "other";
    }
    return "other";
}

Trajectory parse_trajectory(std::string raw,
                            std::string question,
                            std::string gold_answer,
                            std::string image_ref,
                            bool        strict,
                            std::string trajectory_id) {
    if (gold_answer.empty()) {
        throw Error(ErrorCode::EmptyInput, "gold_answer must be non-empty");
    }
    if (raw.empty() && strict) {
        throw Error(ErrorCode::EmptyInput, "empty trajectory text");
    }

    Trajectory traj;
    traj.raw           = std::move(raw);
    traj.question      = std::move(question);
    traj.gold_answer   = std::move(gold_answer);
    traj.image_ref     = std::move(image_ref);
    traj.trajectory_id = std::move(trajectory_id);

    const std::string & text = traj.raw;

    auto push_other = [&](size_t begin, size_t end) {
        if (begin >= end) return;
        // adjacent untagged regions coalesce into one block
        if (!traj.blocks.empty() && traj.blocks.back().kind == BlockKind::Other &&
            traj.blocks.back().span_end == begin) {
            Block & prev = traj.blocks.back();
            prev.span_end = end;
            prev.text     = text.substr(prev.span_begin, end - prev.span_begin);
            return;
        }
        traj.blocks.push_back({ BlockKind::Other, text.substr(begin, end - begin), begin, end });
    };

    size_t pos = 0;
    while (pos < text.size()) {
        size_t          tag_pos = std::string::npos;
        const TagSpec * spec    = nullptr;
        for (const TagSpec & t : kTags) {
            size_t p = text.find(t.open, pos);
            if (p < tag_pos) {
                tag_pos = p;
                spec    = &t;
            }
        }
        if (spec == nullptr) {
            push_other(pos, text.size());
            break;
        }
        push_other(pos, tag_pos);

        size_t inner     = tag_pos + std::strlen(spec->open);
        size_t close_pos = text.find(spec->close, inner);
        if (close_pos == std::string::npos) {
            if (strict) {
                throw Error(ErrorCode::MalformedTags,
                            std::string("unclosed ") + spec->open + " at offset " +
                                std::to_string(tag_pos));
            }
            // lenient: the malformed region becomes plain text
            push_other(tag_pos, text.size());
            break;
        }
        size_t block_end = close_pos + std::strlen(spec->close);
        traj.blocks.push_back(
            { spec->kind, text.substr(inner, close_pos - inner), tag_pos, block_end });
        pos = block_end;
    }

    return traj;
}

std::string reconstruct(const Trajectory & traj) {
    std::string out;
    out.reserve(traj.raw.size());
    for (const Block & block : traj.blocks) {
        if (block.kind == BlockKind::Other) {
            out += block.text;
            continue;
        }
        for (const TagSpec & t : kTags) {
            if (t.kind == block.kind) {
                out += t.open;
                out += block.text;
                out += t.close;
                break;
            }
        }
    }
    return out;
}

int whitespace_word_count(const std::string & text) {
    int  count   = 0;
    bool in_word = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

bool has_perception(const Trajectory & traj) {
    for (const Block & block : traj.blocks) {
        if (block.kind == BlockKind::Perception) return true;
    }
    return false;
}

PerceptionPayload perception_payload(const Trajectory &  traj,
                                     int                 unit_budget,
                                     const UnitCounter & counter) {
    PerceptionPayload payload;
    bool              first = true;
    for (const Block & block : traj.blocks) {
        if (block.kind != BlockKind::Perception) continue;
        if (!first) payload.evidence_text += '\n';
        payload.evidence_text += block.text;
        first = false;
    }
    if (first) {
        throw Error(ErrorCode::NoPerceptionBlocks,
                    "trajectory " + traj.trajectory_id + " has no perception blocks");
    }
    payload.unit_count  = counter ? counter(payload.evidence_text)
                                  : whitespace_word_count(payload.evidence_text);
    payload.over_budget = payload.unit_count > unit_budget;
    return payload;
}

std::string extract_final_answer_text(const Trajectory & traj, bool * from_answer_block) {
    for (auto it = traj.blocks.rbegin(); it != traj.blocks.rend(); ++it) {
        if (it->kind == BlockKind::Answer) {
            if (from_answer_block) *from_answer_block = true;
            return it->text;
        }
    }
    if (from_answer_block) *from_answer_block = false;
    // no <answer> block: fall back to the trailing untagged text
    if (!traj.blocks.empty() && traj.blocks.back().kind == BlockKind::Other) {
        return traj.blocks.back().text;
    }
    return traj.raw;
}

bool SpanMap::has_perception_range() const {
    for (size_t i = 0; i < block_ranges.size(); ++i) {
        if (block_kinds[i] == BlockKind::Perception && !block_ranges[i].empty()) return true;
    }
    return false;
}

SpanMap map_block_spans(const Trajectory & traj, const std::vector<TokenOffset> & token_offsets) {
    for (size_t i = 0; i < token_offsets.size(); ++i) {
        const TokenOffset & tok = token_offsets[i];
        if (tok.char_end < tok.char_begin) {
            throw Error(ErrorCode::OffsetsOutOfOrder,
                        "token " + std::to_string(tok.token_index) + " has negative extent");
        }
        if (tok.char_end > traj.raw.size()) {
            throw Error(ErrorCode::OffsetsBeyondRaw,
                        "token " + std::to_string(tok.token_index) + " ends at " +
                            std::to_string(tok.char_end) + " > raw length " +
                            std::to_string(traj.raw.size()));
        }
        if (i > 0) {
            const TokenOffset & prev = token_offsets[i - 1];
            if (tok.char_begin < prev.char_end || tok.token_index <= prev.token_index) {
                throw Error(ErrorCode::OffsetsOutOfOrder,
                            "token offsets must be sorted and non-overlapping");
            }
        }
    }

    SpanMap map;
    map.trajectory_id = traj.trajectory_id;
    map.token_units   = true;
    if (!token_offsets.empty()) {
        map.total = { token_offsets.front().token_index, token_offsets.back().token_index + 1 };
    }

    size_t t = 0;
    for (const Block & block : traj.blocks) {
        while (t < token_offsets.size() && token_offsets[t].char_begin < block.span_begin) ++t;
        size_t first = t;
        while (t < token_offsets.size() && token_offsets[t].char_begin < block.span_end) ++t;
        IndexRange range;
        if (t > first) {
            range = { token_offsets[first].token_index, token_offsets[t - 1].token_index + 1 };
        }
        map.block_ranges.push_back(range);
        map.block_kinds.push_back(block.kind);
    }
    return map;
}

SpanMap char_span_map(const Trajectory & traj) {
    SpanMap map;
    map.trajectory_id = traj.trajectory_id;
    map.token_units   = false;
    map.total         = { 0, static_cast<int>(traj.raw.size()) };
    for (const Block & block : traj.blocks) {
        map.block_ranges.push_back(
            { static_cast<int>(block.span_begin), static_cast<int>(block.span_end) });
        map.block_kinds.push_back(block.kind);
    }
    return map;
}

}  // namespace moca
