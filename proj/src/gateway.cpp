#include "longcot/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "longcot/common.hpp"

#include "longcot/http.hpp"

namespace longcot {

using json = nlohmann::json;

std::string_view role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_name(std::string_view name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    throw std::invalid_argument("unknown role: " + std::string(name));
}

std::string_view finish_reason_name(FinishReason reason) {
    switch (reason) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

std::string validate_request(const GenerationRequest& request) {
    if (request.model_id.empty()) {
        return "model_id is empty";
    }
    if (request.messages.empty()) {
        return "messages are empty";
    }
    if (request.sample_index < 0) {
        return "sample_index is negative";
    }
    std::size_t first = 0;
    if (request.messages[0].role == Role::system) {
        first = 1;
        if (request.messages.size() == 1) {
            return "system message without a user turn";
        }
    }
    for (std::size_t i = first; i < request.messages.size(); ++i) {
        const Message& m = request.messages[i];
        if (m.role == Role::system) {
            return "system message not in leading position";
        }
        Role expected = ((i - first) % 2 == 0) ? Role::user : Role::assistant;
        if (m.role != expected) {
            return "roles do not alternate user/assistant";
        }
    }
    if (request.messages.back().role != Role::user) {
        return "last message must be from the user";
    }
    return "";
}

std::string fingerprint(const GenerationRequest& request) {
    json payload = json::array();
    payload.push_back(request.model_id);
    json messages = json::array();
    for (const Message& m : request.messages) {
        messages.push_back({{"content", m.content}, {"role", role_name(m.role)}});
    }
    payload.push_back(std::move(messages));
    payload.push_back({{"max_tokens", request.sampling.max_tokens},
                       {"temperature", request.sampling.temperature},
                       {"top_p", request.sampling.top_p}});
    payload.push_back(request.sample_index);
    return hex64(fnv1a64(payload.dump()));
}

MockScript MockScript::load(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path));
    MockScript script;
    script.default_text = doc.value("default_text", script.default_text);
    if (doc.contains("entries")) {
        for (auto it = doc["entries"].begin(); it != doc["entries"].end(); ++it) {
            MockEntry entry;
            entry.text = it.value().at("text").get<std::string>();
            entry.completion_tokens = it.value().value("completion_tokens", -1L);
            entry.latency_ms = it.value().value("latency_ms", 0);
            script.entries[it.key()] = std::move(entry);
        }
    }
    return script;
}

void MockScript::save(const std::filesystem::path& path) const {
    json entries_doc = json::object();
    for (const auto& [fp, entry] : entries) {
        json e = {{"text", entry.text}};
        if (entry.completion_tokens >= 0) {
            e["completion_tokens"] = entry.completion_tokens;
        }
        if (entry.latency_ms != 0) {
            e["latency_ms"] = entry.latency_ms;
        }
        entries_doc[fp] = std::move(e);
    }
    json doc = {{"default_text", default_text}, {"entries", std::move(entries_doc)}};
    write_file(path, doc.dump(2) + "\n");
}

void MockScript::add(const GenerationRequest& request, MockEntry entry) {
    entries[fingerprint(request)] = std::move(entry);
}

GenerationResult MockBackend::generate(const GenerationRequest& request) {
    GenerationResult result;
    result.request_id = request.request_id;
    if (std::string err = validate_request(request); !err.empty()) {
        result.finish_reason = FinishReason::error;
        result.error_message = "invalid request: " + err;
        return result;
    }
    std::string fp = fingerprint(request);
    auto it = script_.entries.find(fp);
    const MockEntry* entry = nullptr;
    if (it != script_.entries.end()) {
        entry = &it->second;
        result.text = entry->text;
    } else {
        result.text = script_.default_text;
    }
    if (entry && entry->latency_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(entry->latency_ms));
    }
    result.completion_tokens = (entry && entry->completion_tokens >= 0) ? entry->completion_tokens
                                                                        : whitespace_token_count(result.text);
    result.finish_reason = FinishReason::stop;
    result.attempt_count = 1;
    return result;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        throw std::invalid_argument("http backend needs a base_url");
    }
}

GenerationResult HttpBackend::generate(const GenerationRequest& request) {
    GenerationResult result;
    result.request_id = request.request_id;
    if (std::string err = validate_request(request); !err.empty()) {
        result.finish_reason = FinishReason::error;
        result.error_message = "invalid request: " + err;
        return result;
    }

    json body = {{"model", request.model_id},
                 {"temperature", request.sampling.temperature},
                 {"top_p", request.sampling.top_p},
                 {"max_tokens", request.sampling.max_tokens}};
    json messages = json::array();
    for (const Message& m : request.messages) {
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    body["messages"] = std::move(messages);
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    const int attempts = config_.retry.max_retries + 1;
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        result.attempt_count = attempt;
        if (attempt > 1) {
            double backoff = config_.retry.initial_backoff_ms;
            for (int k = 2; k < attempt; ++k) {
                backoff *= config_.retry.multiplier;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(backoff)));
        }

        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_write_timeout(config_.timeout_seconds, 0);

        auto res = client.Post(config_.api_path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;  // retryable
        }
        if (res->status >= 500) {
            last_error = "server error: HTTP " + std::to_string(res->status);
            continue;  // retryable
        }
        if (res->status != 200) {
            result.finish_reason = FinishReason::error;
            result.error_message = "HTTP " + std::to_string(res->status) + ": " + res->body;
            return result;  // client errors are not retried
        }

        json doc = json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty()) {
            result.finish_reason = FinishReason::error;
            result.error_message = "malformed response body";
            return result;
        }
        const json& choice = doc["choices"][0];
        result.text = choice.contains("message") ? choice["message"].value("content", "") : "";
        std::string finish = choice.value("finish_reason", "stop");
        result.finish_reason = (finish == "length") ? FinishReason::length : FinishReason::stop;
        if (doc.contains("usage") && doc["usage"].contains("completion_tokens")) {
            result.completion_tokens = doc["usage"]["completion_tokens"].get<long>();
        } else {
            result.completion_tokens = whitespace_token_count(result.text);
        }
        return result;
    }

    result.finish_reason = FinishReason::error;
    result.error_message = last_error + " (after " + std::to_string(attempts) + " attempts)";
    return result;
}

std::unique_ptr<Backend> make_backend(const std::string& kind, const std::string& base_url,
                                      const std::string& api_path, const std::filesystem::path& mock_script_path,
                                      const RetryPolicy& retry) {
    if (kind == "mock") {
        if (mock_script_path.empty()) {
            throw std::invalid_argument("mock backend needs a script path");
        }
        return std::make_unique<MockBackend>(MockScript::load(mock_script_path));
    }
    if (kind == "http") {
        HttpBackendConfig config;
        config.base_url = base_url;
        if (!api_path.empty()) {
            config.api_path = api_path;
        }
        if (const char* key = std::getenv("INFERENCE_API_KEY")) {
            config.api_key = key;
        }
        config.retry = retry;
        return std::make_unique<HttpBackend>(std::move(config));
    }
    throw std::invalid_argument("unknown backend kind: " + kind);
}

std::vector<GenerationResult> generate_batch(Backend& backend, const std::vector<GenerationRequest>& requests,
                                             int max_in_flight) {
    {
        std::unordered_map<std::string, int> seen;
        for (const auto& r : requests) {
            if (++seen[r.request_id] > 1) {
                throw std::invalid_argument("duplicate request_id: " + r.request_id);
            }
        }
    }
    std::vector<GenerationResult> results(requests.size());
    run_bounded(requests.size(), max_in_flight, [&](std::size_t i) {
        try {
            results[i] = backend.generate(requests[i]);
        } catch (const std::exception& e) {
            results[i].request_id = requests[i].request_id;
            results[i].finish_reason = FinishReason::error;
            results[i].error_message = e.what();
        }
    });
    return results;
}

}  // namespace longcot
