#include <chrono>
#include <thread>

#include <httplib.h>

#include "bbo/backend.hpp"
#include "bbo/errors.hpp"

namespace bbo {

namespace {

// "https://host[:port]/prefix" -> (scheme://host[:port], prefix)
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw ContractViolation("HttpBackend: base_url must include a scheme");
    const auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    return {base_url.substr(0, path_start), base_url.substr(path_start)};
}

bool retryable_status(int status) {
    return status == 408 || status == 409 || status == 429 || status >= 500;
}

} // namespace

CompletionResponse HttpBackend::complete(const CompletionRequest& req) {
    req.validate();
    const auto [origin, prefix] = split_base_url(config_.base_url);
    const std::string path = prefix + "/chat/completions";
    const std::string body = build_chat_request_body(req);

    std::string last_error;
    int backoff_ms = config_.initial_backoff_ms;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client client(origin);
        client.set_connection_timeout(config_.timeout_s);
        client.set_read_timeout(config_.timeout_s);
        client.set_bearer_token_auth(api_key_);

        const auto start = std::chrono::steady_clock::now();
        auto result = client.Post(path, body, "application/json");
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status != 200) {
            last_error = "status " + std::to_string(result->status);
            if (retryable_status(result->status)) continue;
            throw BackendUnavailable("provider rejected request: " + last_error);
        }
        auto response = parse_chat_response_body(result->body);
        response.latency_ms = static_cast<int>(elapsed);
        return response;
    }
    throw BackendUnavailable("completion failed after " + std::to_string(config_.max_attempts) +
                             " attempts: " + last_error);
}

} // namespace bbo
