#pragma once

/**
 * Reward-tree construction and persistence.
 *
 * Pipeline: embed criteria -> unit-normalize -> merge near-duplicates ->
 * cluster incrementally -> leaf entries become coarse parents, each
 * summarized by the completion backend.
 */

#include "dgprm/backend.hpp"
#include "dgprm/cftree.hpp"
#include "dgprm/config.hpp"
#include "dgprm/types.hpp"

#include <string>
#include <vector>

namespace dgprm {

struct MergeRecord {
    std::string absorbed_id;
    std::string into_id;
    size_t kept_text_len = 0;
    size_t absorbed_text_len = 0;
};

struct DedupResult {
    std::vector<Criterion> kept;
    std::vector<MergeRecord> merges;
};

/// Greedy single pass in input order. An incoming criterion merges into
/// the first retained one within cosine distance xi; the longer text wins
/// (ties keep the earlier criterion), source_ids union, and the kept
/// text's embedding travels with it. Otherwise the criterion is retained
/// as new.
DedupResult dedup_merge(const std::vector<Criterion>& cs, double xi);

/// One coarse-grained criterion covering the children.
std::string summarize_parent(const std::vector<Criterion>& children,
                             CompletionBackend& backend, const PipelineConfig& cfg);

struct BuildResult {
    RewardTree tree;
    std::vector<MergeRecord> merges;
};

/// Full pipeline from criteria texts to a persistent two-level tree.
/// Embeddings are quantized to binary32 precision on entry so the tree
/// file round-trips bit-exactly.
BuildResult build_tree(const std::vector<Criterion>& cs, const PipelineConfig& cfg,
                       EmbeddingBackend& embedder, CompletionBackend& completer);

/// Structural validation: dimensions, non-empty parents, unique child
/// membership, finite embeddings. Throws on violation.
void check_tree(const RewardTree& t);

void save_tree(const RewardTree& t, const std::string& path);
RewardTree load_tree(const std::string& path);

/// base64 of the vector as little-endian binary32 components.
std::string embedding_to_b64(const EmbeddingVector& v);
/// Inverse of embedding_to_b64. Throws CorruptEmbedding when the payload
/// is not valid base64 or is not exactly 4*expected_dim bytes.
EmbeddingVector embedding_from_b64(const std::string& b64, int expected_dim);

} // namespace dgprm
