#include "moca/oracle.h"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include "json.hpp"
#include "moca/errors.h"

namespace moca {
namespace {

using json = nlohmann::json;

std::string normalize_newlines(const std::string & s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r') {
            out.push_back('\n');
            if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

// nlohmann::json orders object keys lexicographically, which gives us the
// canonical field order for free. Message order stays semantic.
json canonical_request(const ChatRequest & request) {
    json messages = json::array();
    for (const ChatMessage & m : request.messages) {
        messages.push_back({ { "content", normalize_newlines(m.content) }, { "role", m.role } });
    }
    json j = {
        { "max_output_units", request.max_output_units },
        { "messages",         std::move(messages)      },
        { "model",            request.model_name       },
        { "temperature",      request.temperature      },
    };
    if (request.seed) j["seed"] = *request.seed;
    return j;
}

uint64_t fnv1a64(std::string_view data, uint64_t seed) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(uint64_t v) {
    static const char * digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

int jitter_ms(int max_ms) {
    if (max_ms <= 0) return 0;
    thread_local std::mt19937_64 rng{ std::random_device{}() };
    return static_cast<int>(rng() % static_cast<uint64_t>(max_ms + 1));
}

}  // namespace

std::string request_digest(const ChatRequest & request) {
    std::string canonical = canonical_request(request).dump();
    // two independent 64-bit lanes make accidental collisions negligible
    uint64_t lo = fnv1a64(canonical, 14695981039346656037ull);
    uint64_t hi = fnv1a64(canonical, 0x9e3779b97f4a7c15ull);
    return hex64(hi) + hex64(lo);
}

std::optional<std::string> ReplayCassette::lookup(const std::string & digest) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    return it->second.completion;
}

void ReplayCassette::store(const std::string & digest,
                           const ChatRequest & request,
                           const std::string & completion) {
    std::lock_guard<std::mutex> lock(mutex_);
    entries_[digest] = Entry{ canonical_request(request).dump(), completion };
}

size_t ReplayCassette::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

ReplayCassette ReplayCassette::load(const std::string & path, CassetteMode mode) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, "cassette file: " + path);
    }
    ReplayCassette cassette(mode);
    std::string    line;
    size_t         line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("digest") || !j.contains("completion")) {
            throw Error(ErrorCode::SchemaViolation,
                        path + ":" + std::to_string(line_no) + ": bad cassette entry");
        }
        cassette.entries_[j["digest"].get<std::string>()] =
            Entry{ j.value("request_canonical", ""), j["completion"].get<std::string>() };
    }
    return cassette;
}

void ReplayCassette::save(const std::string & path) const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write cassette: " + path);
    }
    for (const auto & [digest, entry] : entries_) {  // std::map: sorted, deterministic
        json j = { { "completion", entry.completion },
                   { "digest", digest },
                   { "request_canonical", entry.request_canonical } };
        out << j.dump() << '\n';
    }
}

OracleClient::OracleClient(ClientConfig config, Transport * transport, ReplayCassette * cassette)
    : config_(std::move(config)), transport_(transport), cassette_(cassette) {}

std::string OracleClient::complete(const ChatRequest & request) {
    ChatRequest req = request;
    if (req.model_name.empty()) req.model_name = config_.model_name;

    if (cassette_ && cassette_->mode() == CassetteMode::Replay) {
        std::string digest = request_digest(req);
        auto        hit    = cassette_->lookup(digest);
        if (!hit) {
            throw Error(ErrorCode::CassetteMiss, "no recorded completion for digest " + digest);
        }
        return *hit;
    }

    std::string completion = complete_live(req);
    if (cassette_ && cassette_->mode() == CassetteMode::Record) {
        cassette_->store(request_digest(req), req, completion);
    }
    return completion;
}

std::string OracleClient::complete_live(const ChatRequest & request) {
    if (transport_ == nullptr) {
        throw Error(ErrorCode::OracleUnavailable, "no transport configured (replay-only client)");
    }
    if (!config_.auth_token_env.empty() && std::getenv(config_.auth_token_env.c_str()) == nullptr) {
        throw Error(ErrorCode::AuthMissing,
                    "environment variable " + config_.auth_token_env + " is not set");
    }

    json body = {
        { "model",       request.model_name      },
        { "messages",    json::array()           },
        { "temperature", request.temperature     },
        { "max_tokens",  request.max_output_units },
    };
    for (const ChatMessage & m : request.messages) {
        body["messages"].push_back({ { "role", m.role }, { "content", m.content } });
    }
    if (request.seed) body["seed"] = *request.seed;
    std::string payload = body.dump();

    std::string last_failure;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            int backoff = config_.backoff_base_ms << (attempt - 1);
            std::this_thread::sleep_for(
                std::chrono::milliseconds(backoff + jitter_ms(backoff / 2)));
        }
        Transport::Response resp = transport_->post(config_, payload);
        if (resp.error.empty() && resp.status == 200) {
            json j = json::parse(resp.body, nullptr, false);
            if (!j.is_discarded() && j.contains("choices") && !j["choices"].empty()) {
                const json & choice = j["choices"][0];
                if (choice.contains("message") && choice["message"].contains("content")) {
                    return choice["message"]["content"].get<std::string>();
                }
                if (choice.contains("text")) {
                    return choice["text"].get<std::string>();
                }
            }
            throw Error(ErrorCode::OracleUnavailable, "malformed completion response");
        }
        bool transient = !resp.error.empty() || resp.status == 429 || resp.status >= 500;
        last_failure   = resp.error.empty() ? "HTTP " + std::to_string(resp.status) : resp.error;
        if (!transient) {
            throw Error(ErrorCode::OracleUnavailable, last_failure);
        }
    }
    throw Error(ErrorCode::OracleUnavailable,
                "retries exhausted after " + std::to_string(1 + config_.max_retries) +
                    " attempts: " + last_failure);
}

std::string ScriptedOracle::complete(const ChatRequest & request) {
    std::lock_guard<std::mutex> lock(mutex_);
    requests_.push_back(request);
    if (next_ >= script_.size()) {
        throw Error(ErrorCode::Exhausted,
                    "scripted oracle exhausted after " + std::to_string(script_.size()) + " calls");
    }
    return script_[next_++];
}

std::string RecordingOracle::complete(const ChatRequest & request) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        requests_.push_back(request);
    }
    return inner_.complete(request);
}

}  // namespace moca
