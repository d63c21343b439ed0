#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace longcot {

enum class Role { system, user, assistant };

std::string_view role_name(Role role);
Role role_from_name(std::string_view name);

struct Message {
    Role role{Role::user};
    std::string content;
};

struct Sampling {
    double temperature{0.6};
    double top_p{1.0};
    int max_tokens{8192};
};

struct GenerationRequest {
    std::string request_id;
    std::string model_id;
    std::vector<Message> messages;
    Sampling sampling;
    // Distinguishes repeated draws of the same prompt (rejection sampling,
    // multi-sample evaluation). Part of the fingerprint.
    int sample_index{0};
};

// Empty string when the request satisfies its invariants: messages non-empty,
// at most one leading system message, roles strictly alternating afterwards.
std::string validate_request(const GenerationRequest& request);

// Stable hash of (model_id, messages, sampling, sample_index), hex-encoded.
// Keys mock scripts and response caches; identical requests always map to the
// same fingerprint across runs and platforms.
std::string fingerprint(const GenerationRequest& request);

enum class FinishReason { stop, length, error };

std::string_view finish_reason_name(FinishReason reason);

struct GenerationResult {
    std::string request_id;
    std::string text;
    long completion_tokens{0};
    FinishReason finish_reason{FinishReason::error};
    int attempt_count{1};
    std::string error_message;  // set only when finish_reason == error
};

class Backend {
public:
    virtual ~Backend() = default;
    // Must be safe for concurrent calls.
    virtual GenerationResult generate(const GenerationRequest& request) = 0;
};

struct MockEntry {
    std::string text;
    long completion_tokens{-1};  // <0: derived from text by whitespace count
    int latency_ms{0};
};

// Deterministic scripted backend: fingerprint -> entry, with a fallback for
// unscripted requests. Same fingerprint always yields the same output.
struct MockScript {
    std::unordered_map<std::string, MockEntry> entries;
    std::string default_text{"I am not able to solve this."};

    static MockScript load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
    void add(const GenerationRequest& request, MockEntry entry);
};

class MockBackend : public Backend {
public:
    explicit MockBackend(MockScript script) : script_(std::move(script)) {}
    MockBackend() = default;

    GenerationResult generate(const GenerationRequest& request) override;

    const MockScript& script() const { return script_; }

private:
    MockScript script_;
};

struct RetryPolicy {
    int max_retries{2};  // 3 attempts total
    int initial_backoff_ms{1000};
    double multiplier{2.0};
};

struct HttpBackendConfig {
    std::string base_url;                            // e.g. "http://localhost:8000"
    std::string api_path{"/v1/chat/completions"};
    std::string api_key;                             // usually from INFERENCE_API_KEY
    RetryPolicy retry;
    int timeout_seconds{300};
};

// Client for an OpenAI-compatible chat-completions endpoint. Transport errors
// and 5xx responses are retried with exponential backoff; exhaustion degrades
// to an error-result, never an exception.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    GenerationResult generate(const GenerationRequest& request) override;

private:
    HttpBackendConfig config_;
};

// Reads endpoint configuration and constructs a backend. kind is "mock" or
// "http"; mock requires a script path, http requires a base URL.
std::unique_ptr<Backend> make_backend(const std::string& kind, const std::string& base_url,
                                      const std::string& api_path,
                                      const std::filesystem::path& mock_script_path,
                                      const RetryPolicy& retry);

// Issues requests with at most max_in_flight outstanding at any instant.
// Results come back in input order; per-request failures yield error-results
// and never poison the batch. Duplicate request_ids are a caller bug.
std::vector<GenerationResult> generate_batch(Backend& backend,
                                             const std::vector<GenerationRequest>& requests,
                                             int max_in_flight);

}  // namespace longcot
