#pragma once

/**
 * Content-addressed disk cache for backend responses.
 *
 * Layout: {cache_dir}/{first 2 hex of digest}/{digest}.json, where the
 * digest is SHA-256 of (backend kind, model, canonical request body). The
 * stored value is the canonical response body, so a miss followed by a hit
 * returns byte-identical payloads.
 */

#include "dgprm/backend.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace dgprm {

/// SHA-256 hex digest of arbitrary bytes.
std::string sha256_hex(const std::string& bytes);

/// SHA-256 hex digest of a file's contents. Throws IoError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

struct CacheKey {
    std::string digest; // 64 hex chars

    static CacheKey for_completion(const std::string& backend_kind,
                                   const CompletionRequest& req);
    static CacheKey for_embedding(const std::string& backend_kind,
                                  const std::string& model,
                                  const std::vector<std::string>& texts);
};

class DiskCache {
public:
    explicit DiskCache(std::filesystem::path root);

    std::optional<std::string> get(const CacheKey& key) const;
    void put(const CacheKey& key, const std::string& canonical_body);

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path path_for(const CacheKey& key) const;
    std::mutex& shard_for(const CacheKey& key) const;

    std::filesystem::path root_;
    // Writes are serialized per key; 16 shards keyed on the digest's first
    // hex nibble keep contention negligible.
    mutable std::array<std::mutex, 16> shards_;
};

/// Caching decorator for completion backends.
class CachedCompletionBackend final : public CompletionBackend {
public:
    CachedCompletionBackend(std::shared_ptr<CompletionBackend> inner,
                            std::shared_ptr<DiskCache> cache)
        : inner_(std::move(inner)), cache_(std::move(cache)) {}

    BackendResponse complete(const CompletionRequest& req) override;
    std::string kind() const override { return inner_->kind(); }

private:
    std::shared_ptr<CompletionBackend> inner_;
    std::shared_ptr<DiskCache> cache_;
};

/// Caching decorator for embedding backends.
class CachedEmbeddingBackend final : public EmbeddingBackend {
public:
    CachedEmbeddingBackend(std::shared_ptr<EmbeddingBackend> inner,
                           std::shared_ptr<DiskCache> cache)
        : inner_(std::move(inner)), cache_(std::move(cache)) {}

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                       const std::string& model) override;
    std::string kind() const override { return inner_->kind(); }
    int dim() const override { return inner_->dim(); }

private:
    std::shared_ptr<EmbeddingBackend> inner_;
    std::shared_ptr<DiskCache> cache_;
};

/// Canonical JSON serialization used for both the cache value and the
/// byte-transparency guarantee.
std::string canonical_response_body(const BackendResponse& resp);
BackendResponse response_from_body(const std::string& body);

} // namespace dgprm
