#pragma once

#include "dgprm/types.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace dgprm {

struct CompletionRequest {
    std::string model;
    std::string prompt;
    double temperature = 0.0;
    int n_samples = 1;
    int max_output_tokens = 1024;
};

struct TokenUsage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

struct BackendResponse {
    std::vector<std::string> texts; // length == requested n_samples
    TokenUsage usage;
};

/// Text-completion backend. Implementations must be reentrant; callers may
/// issue requests concurrently.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual BackendResponse complete(const CompletionRequest& req) = 0;
    virtual std::string kind() const = 0;
};

/// Embedding backend. One vector per input text, order preserved.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                               const std::string& model) = 0;
    virtual std::string kind() const = 0;
    virtual int dim() const = 0;
};

/// Thread-safe running total of backend token usage for cost reporting.
class UsageTally {
public:
    void add(const TokenUsage& u) {
        input_ += u.input_tokens;
        output_ += u.output_tokens;
    }
    TokenUsage total() const { return {input_.load(), output_.load()}; }

private:
    std::atomic<std::int64_t> input_{0};
    std::atomic<std::int64_t> output_{0};
};

/// Decorator that accumulates usage from every completion into a tally.
class MeteredCompletionBackend final : public CompletionBackend {
public:
    MeteredCompletionBackend(std::shared_ptr<CompletionBackend> inner,
                             std::shared_ptr<UsageTally> tally)
        : inner_(std::move(inner)), tally_(std::move(tally)) {}

    BackendResponse complete(const CompletionRequest& req) override {
        auto resp = inner_->complete(req);
        tally_->add(resp.usage);
        return resp;
    }
    std::string kind() const override { return inner_->kind(); }

private:
    std::shared_ptr<CompletionBackend> inner_;
    std::shared_ptr<UsageTally> tally_;
};

/// Validates embed() preconditions and postconditions common to all
/// backends: non-empty inputs, one finite vector of the right length per
/// text, order preserved.
std::vector<EmbeddingVector> embed_checked(EmbeddingBackend& backend,
                                           const std::vector<std::string>& texts,
                                           const std::string& model);

} // namespace dgprm
