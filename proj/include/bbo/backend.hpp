#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace bbo {

enum class Role { System, User, Assistant };

std::string role_name(Role r);

struct Message {
    Role role = Role::User;
    std::string content;
};

struct CompletionRequest {
    std::string model;
    std::vector<Message> messages;
    double temperature = 0.7;
    int max_tokens = 256;

    /// Throws ContractViolation unless messages are non-empty, the final
    /// message is a user turn, temperature is in [0,2] and max_tokens > 0.
    void validate() const;
};

struct CompletionResponse {
    std::string text;
    int usage_tokens = 0;
    int latency_ms = 0;
};

/// Canonical JSON serialization of a request (sorted keys), the basis of the
/// cache digest. Two requests differing in any field serialize differently.
std::string canonical_request_json(const CompletionRequest& req);

/// Stable hex digest of the canonical serialization.
std::string request_digest(const CompletionRequest& req);

/// Text-completion boundary. Implementations must be callable from multiple
/// threads at once; `complete_batch` is the contract MCTS uses for its k
/// parallel expansion requests.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string name() const = 0;

    virtual CompletionResponse complete(const CompletionRequest& req) = 0;

    /// n completions of the same request. The default launches n concurrent
    /// complete() calls and joins them in index order; deterministic
    /// backends override this with a sequential loop so results never depend
    /// on thread scheduling.
    virtual std::vector<CompletionResponse> complete_batch(const CompletionRequest& req, int n);
};

/// Fixed scripted responses, served in order. `cycle` restarts from the top
/// instead of throwing when the script is exhausted.
class MockBackend final : public Backend {
public:
    explicit MockBackend(std::vector<std::string> responses, bool cycle = false);

    std::string name() const override { return "mock:scripted"; }
    CompletionResponse complete(const CompletionRequest& req) override;
    std::vector<CompletionResponse> complete_batch(const CompletionRequest& req, int n) override;

private:
    std::vector<std::string> responses_;
    bool cycle_;
    std::size_t cursor_ = 0;
    std::mutex mutex_;
};

/// Recorded responses keyed by request digest, each key holding the ordered
/// list of responses observed for that digest with a consumption cursor.
class ReplayCache {
public:
    ReplayCache() = default;
    ReplayCache(ReplayCache&& other) noexcept;
    ReplayCache& operator=(ReplayCache&& other) noexcept;

    void record(const std::string& digest, const CompletionResponse& response);

    /// Next recorded response for this digest; empty once exhausted.
    std::optional<CompletionResponse> next(const std::string& digest);

    void reset_cursors();
    std::size_t size() const;

    /// Append-only JSONL persistence.
    void append_to_file(const std::string& path, const std::string& digest,
                        const CompletionResponse& response);
    static ReplayCache load_file(const std::string& path);

private:
    struct Entry {
        std::vector<CompletionResponse> responses;
        std::size_t cursor = 0;
    };
    std::map<std::string, Entry> entries_;
    mutable std::mutex mutex_;
};

/// Serves recorded responses; a miss in strict mode is a ReplayMiss error.
class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(ReplayCache cache, std::string label = "replay");

    std::string name() const override { return name_; }
    CompletionResponse complete(const CompletionRequest& req) override;
    std::vector<CompletionResponse> complete_batch(const CompletionRequest& req, int n) override;

private:
    ReplayCache cache_;
    std::string name_;
};

/// Wraps another backend and records every response into a cache (and,
/// optionally, an append-only cache file).
class RecordingBackend final : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ReplayCache> cache,
                     std::string cache_path = "");

    std::string name() const override { return inner_->name(); }
    CompletionResponse complete(const CompletionRequest& req) override;
    std::vector<CompletionResponse> complete_batch(const CompletionRequest& req, int n) override;

private:
    std::shared_ptr<Backend> inner_;
    std::shared_ptr<ReplayCache> cache_;
    std::string cache_path_;
    std::mutex file_mutex_;
};

struct HttpBackendConfig {
    std::string base_url;          // e.g. "https://api.example.com/v1"
    std::string api_key_env = "BBO_API_KEY";
    int max_attempts = 3;
    int initial_backoff_ms = 500;  // doubled per retry
    int timeout_s = 120;
};

/// Live chat-completion client speaking the common provider JSON schema.
/// Transport failures are retried with exponential backoff; exhaustion
/// throws BackendUnavailable.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    std::string name() const override;
    CompletionResponse complete(const CompletionRequest& req) override;

private:
    HttpBackendConfig config_;
    std::string api_key_;
};

/// Request body for the wire schema (exposed for offline tests).
std::string build_chat_request_body(const CompletionRequest& req);

/// Extracts text/usage from a provider response body. Throws
/// BackendUnavailable on malformed payloads.
CompletionResponse parse_chat_response_body(const std::string& body);

} // namespace bbo
