#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace moca {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::string              model_name;
    std::vector<ChatMessage> messages;
    double                   temperature      = 0.0;
    int                      max_output_units = 1024;
    std::optional<int64_t>   seed;
};

struct ClientConfig {
    std::string endpoint_url;        // full chat-completions URL
    std::string model_name;          // substituted into requests that leave it empty
    std::string auth_token_env;      // env var holding the bearer token; empty = no auth
    int         max_retries     = 3;
    int         backoff_base_ms = 500;  // exponential x2, jittered
    int         timeout_ms      = 30000;
    int         max_in_flight   = 8;
};

// Deterministic content hash over a canonical serialization (sorted fields,
// message order preserved, line endings normalized). Stable across processes.
std::string request_digest(const ChatRequest & request);

enum class CassetteMode { Record, Replay, Passthrough };

// Digest-keyed store of recorded completions. Replay mode never touches the
// network: a digest miss raises CassetteMiss instead of falling through.
class ReplayCassette {
  public:
    explicit ReplayCassette(CassetteMode mode) : mode_(mode) {}

    CassetteMode mode() const { return mode_; }

    std::optional<std::string> lookup(const std::string & digest) const;
    void store(const std::string & digest, const ChatRequest & request, const std::string & completion);

    size_t size() const;

    static ReplayCassette load(const std::string & path, CassetteMode mode);
    void                  save(const std::string & path) const;  // sorted by digest

  private:
    struct Entry {
        std::string request_canonical;
        std::string completion;
    };

    CassetteMode                 mode_;
    std::map<std::string, Entry> entries_;
    mutable std::mutex           mutex_;
};

class Oracle {
  public:
    virtual ~Oracle() = default;
    virtual std::string complete(const ChatRequest & request) = 0;
};

// Transport seam under OracleClient; lets tests script failures and count
// live calls.
class Transport {
  public:
    struct Response {
        int         status = 0;
        std::string body;
        std::string error;  // non-empty on connection-level failure
    };

    virtual ~Transport() = default;
    virtual Response post(const ClientConfig & config, const std::string & json_body) = 0;

    int64_t calls() const { return calls_.load(); }

  protected:
    std::atomic<int64_t> calls_{0};
};

// POSTs the de-facto chat-completions wire format over HTTP and reads the
// first choice's message content.
class HttpTransport : public Transport {
  public:
    Response post(const ClientConfig & config, const std::string & json_body) override;
};

class OracleClient : public Oracle {
  public:
    OracleClient(ClientConfig config, Transport * transport, ReplayCassette * cassette);

    std::string complete(const ChatRequest & request) override;

  private:
    std::string complete_live(const ChatRequest & request);

    ClientConfig     config_;
    Transport *      transport_;  // not owned; null allowed in pure replay
    ReplayCassette * cassette_;   // not owned; null = passthrough
};

// Test double: returns scripted completions in order, then errors Exhausted.
// Records every request it receives for blindfold-guarantee assertions.
class ScriptedOracle : public Oracle {
  public:
    explicit ScriptedOracle(std::vector<std::string> script) : script_(std::move(script)) {}

    std::string complete(const ChatRequest & request) override;

    const std::vector<ChatRequest> & requests() const { return requests_; }
    size_t                           calls() const { return next_; }

  private:
    std::vector<std::string> script_;
    std::vector<ChatRequest> requests_;
    size_t                   next_ = 0;
    std::mutex               mutex_;
};

// Decorator that records requests while delegating to another oracle.
class RecordingOracle : public Oracle {
  public:
    explicit RecordingOracle(Oracle & inner) : inner_(inner) {}

    std::string complete(const ChatRequest & request) override;

    const std::vector<ChatRequest> & requests() const { return requests_; }

  private:
    Oracle &                 inner_;
    std::vector<ChatRequest> requests_;
    std::mutex               mutex_;
};

}  // namespace moca
