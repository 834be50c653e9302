#include "bbo/backend.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <thread>

#include <json.hpp>

#include "bbo/errors.hpp"
#include "bbo/rng.hpp"

namespace bbo {

using nlohmann::json;

std::string role_name(Role r) {
    switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    }
    throw ContractViolation("role_name: unknown role");
}

void CompletionRequest::validate() const {
    if (messages.empty()) throw ContractViolation("CompletionRequest: messages must be non-empty");
    if (messages.back().role != Role::User)
        throw ContractViolation("CompletionRequest: final message must be a user turn");
    if (temperature < 0.0 || temperature > 2.0)
        throw ContractViolation("CompletionRequest: temperature outside [0, 2]");
    if (max_tokens < 1) throw ContractViolation("CompletionRequest: max_tokens must be positive");
}

std::string canonical_request_json(const CompletionRequest& req) {
    json j;
    j["model"] = req.model;
    j["temperature"] = req.temperature;
    j["max_tokens"] = req.max_tokens;
    json msgs = json::array();
    for (const auto& m : req.messages)
        msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    j["messages"] = msgs;
    return j.dump(); // json objects keep sorted keys, so the dump is canonical
}

std::string request_digest(const CompletionRequest& req) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(stable_hash(canonical_request_json(req))));
    return buf;
}

std::vector<CompletionResponse> Backend::complete_batch(const CompletionRequest& req, int n) {
    if (n < 1) throw ContractViolation("complete_batch: n must be >= 1");
    std::vector<std::future<CompletionResponse>> futures;
    futures.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        futures.push_back(std::async(std::launch::async, [this, &req] { return complete(req); }));
    std::vector<CompletionResponse> out;
    out.reserve(static_cast<std::size_t>(n));
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

// --- MockBackend -------------------------------------------------------------

MockBackend::MockBackend(std::vector<std::string> responses, bool cycle)
    : responses_(std::move(responses)), cycle_(cycle) {
    if (responses_.empty()) throw ContractViolation("MockBackend: script must be non-empty");
}

CompletionResponse MockBackend::complete(const CompletionRequest& req) {
    req.validate();
    std::lock_guard lock(mutex_);
    if (cursor_ >= responses_.size()) {
        if (!cycle_) throw BackendUnavailable("MockBackend: script exhausted");
        cursor_ = 0;
    }
    return {responses_[cursor_++], 0, 0};
}

std::vector<CompletionResponse> MockBackend::complete_batch(const CompletionRequest& req, int n) {
    std::vector<CompletionResponse> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(complete(req));
    return out;
}

// --- ReplayCache -------------------------------------------------------------

ReplayCache::ReplayCache(ReplayCache&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    entries_ = std::move(other.entries_);
}

ReplayCache& ReplayCache::operator=(ReplayCache&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        entries_ = std::move(other.entries_);
    }
    return *this;
}

void ReplayCache::record(const std::string& digest, const CompletionResponse& response) {
    std::lock_guard lock(mutex_);
    entries_[digest].responses.push_back(response);
}

std::optional<CompletionResponse> ReplayCache::next(const std::string& digest) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    auto& entry = it->second;
    if (entry.cursor >= entry.responses.size()) return std::nullopt;
    return entry.responses[entry.cursor++];
}

void ReplayCache::reset_cursors() {
    std::lock_guard lock(mutex_);
    for (auto& [digest, entry] : entries_) entry.cursor = 0;
}

std::size_t ReplayCache::size() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [digest, entry] : entries_) n += entry.responses.size();
    return n;
}

void ReplayCache::append_to_file(const std::string& path, const std::string& digest,
                                 const CompletionResponse& response) {
    json j;
    j["digest"] = digest;
    j["text"] = response.text;
    j["usage_tokens"] = response.usage_tokens;
    j["latency_ms"] = response.latency_ms;
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("ReplayCache: cannot open cache file " + path);
    out << j.dump() << '\n';
}

ReplayCache ReplayCache::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("ReplayCache: cannot open cache file " + path);
    ReplayCache cache;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = json::parse(line);
        cache.record(j.at("digest").get<std::string>(),
                     {j.at("text").get<std::string>(), j.value("usage_tokens", 0),
                      j.value("latency_ms", 0)});
    }
    return cache;
}

// --- ReplayBackend -----------------------------------------------------------

ReplayBackend::ReplayBackend(ReplayCache cache, std::string label)
    : cache_(std::move(cache)), name_(std::move(label)) {}

CompletionResponse ReplayBackend::complete(const CompletionRequest& req) {
    req.validate();
    const auto digest = request_digest(req);
    auto response = cache_.next(digest);
    if (!response)
        throw ReplayMiss("replay miss for digest " + digest);
    return *response;
}

std::vector<CompletionResponse> ReplayBackend::complete_batch(const CompletionRequest& req, int n) {
    // sequential so cursor consumption follows recorded order
    std::vector<CompletionResponse> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(complete(req));
    return out;
}

// --- RecordingBackend --------------------------------------------------------

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner,
                                   std::shared_ptr<ReplayCache> cache, std::string cache_path)
    : inner_(std::move(inner)), cache_(std::move(cache)), cache_path_(std::move(cache_path)) {
    if (!inner_ || !cache_) throw ContractViolation("RecordingBackend: inner and cache required");
}

CompletionResponse RecordingBackend::complete(const CompletionRequest& req) {
    const auto response = inner_->complete(req);
    const auto digest = request_digest(req);
    cache_->record(digest, response);
    if (!cache_path_.empty()) {
        std::lock_guard lock(file_mutex_);
        cache_->append_to_file(cache_path_, digest, response);
    }
    return response;
}

std::vector<CompletionResponse> RecordingBackend::complete_batch(const CompletionRequest& req, int n) {
    // issue through the inner backend's batch path, record in index order
    auto responses = inner_->complete_batch(req, n);
    const auto digest = request_digest(req);
    for (const auto& r : responses) {
        cache_->record(digest, r);
        if (!cache_path_.empty()) {
            std::lock_guard lock(file_mutex_);
            cache_->append_to_file(cache_path_, digest, r);
        }
    }
    return responses;
}

// --- HttpBackend -------------------------------------------------------------

std::string build_chat_request_body(const CompletionRequest& req) {
    json j;
    j["model"] = req.model;
    j["temperature"] = req.temperature;
    j["max_tokens"] = req.max_tokens;
    json msgs = json::array();
    for (const auto& m : req.messages)
        msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    j["messages"] = msgs;
    return j.dump();
}

CompletionResponse parse_chat_response_body(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw BackendUnavailable(std::string("provider returned unparseable body: ") + e.what());
    }
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
        throw BackendUnavailable("provider response has no choices");
    const auto& choice = j["choices"][0];
    CompletionResponse r;
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string())
        r.text = choice["message"]["content"].get<std::string>();
    else if (choice.contains("text") && choice["text"].is_string())
        r.text = choice["text"].get<std::string>();
    else
        throw BackendUnavailable("provider response has no message content");
    if (j.contains("usage") && j["usage"].contains("total_tokens") &&
        j["usage"]["total_tokens"].is_number())
        r.usage_tokens = j["usage"]["total_tokens"].get<int>();
    return r;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ContractViolation("HttpBackend: base_url required");
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
    if (api_key_.empty())
        throw ContractViolation("HttpBackend: credential env var " + config_.api_key_env + " not set");
}

std::string HttpBackend::name() const { return "live:" + config_.base_url; }

} // namespace bbo
