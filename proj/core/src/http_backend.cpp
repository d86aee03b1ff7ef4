#include "dgprm/http_backend.hpp"

#include "dgprm/errors.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace dgprm {

namespace {

using nlohmann::json;

struct ParsedBase {
    std::string host_port; // scheme://host[:port]
    std::string path_prefix;
};

ParsedBase split_base(const std::string& base) {
    const size_t scheme = base.find("://");
    if (scheme == std::string::npos)
        throw ConfigError("backend.endpoint", "endpoint must carry a scheme: " + base);
    const size_t slash = base.find('/', scheme + 3);
    if (slash == std::string::npos) return {base, ""};
    std::string prefix = base.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base.substr(0, slash), prefix};
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

/// Runs one HTTP POST with the retry policy. Returns the response body on
/// 2xx. Throws RateLimited / TransportError per the final status.
std::string post_with_retries(const std::string& base, const std::string& api_key,
                              const std::string& path, const std::string& body,
                              const RetryPolicy& retry) {
    const auto parsed = split_base(base);
    httplib::Client client(parsed.host_port);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    int last_status = 0;
    std::string last_error;
    for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
        auto res = client.Post((parsed.path_prefix + path).c_str(), headers, body,
                               "application/json");
        if (!res) {
            last_status = 0;
            last_error = httplib::to_string(res.error());
        } else if (res->status >= 200 && res->status < 300) {
            return res->body;
        } else {
            last_status = res->status;
            last_error = res->body;
            if (!retryable_status(res->status)) {
                throw TransportError("HTTP " + std::to_string(res->status) + " from " + path +
                                     " (not retried): " + last_error);
            }
        }
        if (attempt < retry.max_attempts) {
            const auto delay = std::chrono::milliseconds(
                static_cast<long>(retry.backoff_ms) * (1L << (attempt - 1)));
            std::this_thread::sleep_for(delay);
        }
    }
    if (last_status == 429)
        throw RateLimited("HTTP 429 from " + path + " after " +
                          std::to_string(retry.max_attempts) + " attempts");
    throw TransportError("request to " + path + " failed after " +
                         std::to_string(retry.max_attempts) + " attempts (status " +
                         std::to_string(last_status) + "): " + last_error);
}

} // namespace

std::string resolve_api_base(const BackendSettings& settings) {
    if (const char* env = std::getenv("DGPRM_API_BASE"); env && *env) return env;
    if (!settings.endpoint.empty()) return settings.endpoint;
    throw ConfigError("backend.endpoint",
                      "no API base configured (set backend.endpoint or DGPRM_API_BASE)");
}

std::string resolve_api_key() {
    if (const char* env = std::getenv("DGPRM_API_KEY"); env && *env) return env;
    return "";
}

HttpCompletionBackend::HttpCompletionBackend(BackendSettings settings)
    : settings_(std::move(settings)),
      base_(resolve_api_base(settings_)),
      api_key_(resolve_api_key()) {}

BackendResponse HttpCompletionBackend::complete(const CompletionRequest& req) {
    if (req.n_samples < 1) throw InvalidArgument("complete: n_samples must be >= 1");
    if (req.temperature < 0.0) throw InvalidArgument("complete: temperature must be >= 0");

    BackendResponse out;
    // Some servers cap or ignore "n"; keep requesting until n_samples
    // texts are collected.
    while (static_cast<int>(out.texts.size()) < req.n_samples) {
        const int want = req.n_samples - static_cast<int>(out.texts.size());
        json body = {
            {"model", req.model},
            {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
            {"temperature", req.temperature},
            {"n", want},
            {"max_tokens", req.max_output_tokens},
        };
        const auto raw = post_with_retries(base_, api_key_, "/v1/chat/completions",
                                           body.dump(), settings_.retry);
        json j;
        try {
            j = json::parse(raw);
        } catch (const json::exception& e) {
            throw MalformedResponse(std::string("chat completion body is not JSON: ") + e.what());
        }
        const auto choices = j.find("choices");
        if (choices == j.end() || !choices->is_array() || choices->empty())
            throw MalformedResponse("chat completion carries no choices");
        for (const auto& c : *choices) {
            if (static_cast<int>(out.texts.size()) >= req.n_samples) break;
            try {
                out.texts.push_back(c.at("message").at("content").get<std::string>());
            } catch (const json::exception& e) {
                throw MalformedResponse(std::string("chat choice missing message.content: ") +
                                        e.what());
            }
        }
        if (auto usage = j.find("usage"); usage != j.end()) {
            out.usage.input_tokens += usage->value("prompt_tokens", 0);
            out.usage.output_tokens += usage->value("completion_tokens", 0);
        }
    }
    return out;
}

HttpEmbeddingBackend::HttpEmbeddingBackend(BackendSettings settings, int expected_dim)
    : settings_(std::move(settings)),
      base_(resolve_api_base(settings_)),
      api_key_(resolve_api_key()),
      expected_dim_(expected_dim) {}

std::vector<EmbeddingVector> HttpEmbeddingBackend::embed(
    const std::vector<std::string>& texts, const std::string& model) {
    json body = {{"model", model}, {"input", texts}};
    const auto raw = post_with_retries(base_, api_key_, "/v1/embeddings", body.dump(),
                                       settings_.retry);
    json j;
    try {
        j = json::parse(raw);
    } catch (const json::exception& e) {
        throw MalformedResponse(std::string("embeddings body is not JSON: ") + e.what());
    }
    const auto data = j.find("data");
    if (data == j.end() || !data->is_array() || data->size() != texts.size())
        throw MalformedResponse("embeddings response size mismatch");

    std::vector<EmbeddingVector> out(texts.size());
    for (const auto& item : *data) {
        size_t index;
        EmbeddingVector vec;
        try {
            index = item.at("index").get<size_t>();
            vec = item.at("embedding").get<EmbeddingVector>();
        } catch (const json::exception& e) {
            throw MalformedResponse(std::string("embeddings item malformed: ") + e.what());
        }
        if (index >= out.size()) throw MalformedResponse("embeddings index out of range");
        if (static_cast<int>(vec.size()) != expected_dim_)
            throw DimensionMismatch("embedding length " + std::to_string(vec.size()) +
                                    " != expected " + std::to_string(expected_dim_));
        out[index] = std::move(vec);
    }
    return out;
}

} // namespace dgprm
