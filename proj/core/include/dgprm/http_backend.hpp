#pragma once

/**
 * OpenAI-compatible HTTP backends.
 *
 * POST {base}/v1/chat/completions and POST {base}/v1/embeddings with
 * bearer auth from DGPRM_API_KEY. Retries with exponential backoff on 429
 * and 5xx only, up to the configured attempt budget.
 */

#include "dgprm/backend.hpp"
#include "dgprm/config.hpp"

#include <string>

namespace dgprm {

/// Resolves the base URL: DGPRM_API_BASE wins over the config value.
/// Throws ConfigError when neither is set.
std::string resolve_api_base(const BackendSettings& settings);

/// Bearer token from DGPRM_API_KEY; empty when unset (requests go out
/// without an Authorization header).
std::string resolve_api_key();

class HttpCompletionBackend final : public CompletionBackend {
public:
    explicit HttpCompletionBackend(BackendSettings settings);

    BackendResponse complete(const CompletionRequest& req) override;
    std::string kind() const override { return "openai-chat"; }

private:
    BackendSettings settings_;
    std::string base_;
    std::string api_key_;
};

class HttpEmbeddingBackend final : public EmbeddingBackend {
public:
    HttpEmbeddingBackend(BackendSettings settings, int expected_dim);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                       const std::string& model) override;
    std::string kind() const override { return "openai-embeddings"; }
    int dim() const override { return expected_dim_; }

private:
    BackendSettings settings_;
    std::string base_;
    std::string api_key_;
    int expected_dim_;
};

} // namespace dgprm
