#pragma once

/**
 * Deterministic offline backends.
 *
 * The embedding mock derives every vector from a counter-based generator
 * keyed on (text, seed), so runs are reproducible byte-for-byte with no
 * model in the loop. The completion mock replays canned outputs from a
 * script file keyed on the prompt's role marker plus substring matches.
 */

#include "dgprm/backend.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dgprm {

/// Deterministic pseudo-embedding: seeds a counter-based generator with
/// hash(text, seed), draws d standard normals, and L2-normalizes.
EmbeddingVector mock_embed(const std::string& text, int d, std::uint64_t seed);

class MockEmbeddingBackend final : public EmbeddingBackend {
public:
    MockEmbeddingBackend(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                       const std::string& model) override;
    std::string kind() const override { return "mock-embed"; }
    int dim() const override { return dim_; }

private:
    int dim_;
    std::uint64_t seed_;
};

/// One scripted response rule. Rules are evaluated in file order; the
/// first whose role and substrings match the prompt wins.
struct MockRule {
    std::string role; // judge|validator|selector|aspect|scorer|summarizer|*
    std::vector<std::string> contains; // all must appear in the prompt
    std::vector<std::string> outputs;  // cycled to satisfy n_samples
};

class MockCompletionBackend final : public CompletionBackend {
public:
    explicit MockCompletionBackend(std::vector<MockRule> rules)
        : rules_(std::move(rules)) {}

    /// Loads rules from a JSON script:
    ///   {"version": "dgprm-mock/1",
    ///    "rules": [{"role": "judge", "contains": ["..."],
    ///               "outputs": ["..."]} ...]}
    /// "contains" may be a single string or an array; it may be omitted.
    static MockCompletionBackend from_script(const std::string& path);

    BackendResponse complete(const CompletionRequest& req) override;
    std::string kind() const override { return "mock-complete"; }

private:
    std::vector<MockRule> rules_;
};

} // namespace dgprm
