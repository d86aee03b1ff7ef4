#pragma once

/**
 * Incremental clustering-feature tree.
 *
 * Each entry stores (n, linear sum, squared-norm sum) over the points it
 * absorbed, so centroid and radius come out in O(d) without revisiting the
 * points. Insertion descends to the leaf whose entry centroid is nearest,
 * absorbs when the post-absorption radius stays within half the Euclidean
 * threshold, and splits nodes that exceed the branching factor by
 * separating the two farthest entries.
 *
 * Operates on unit-normalized vectors; the Euclidean threshold converts
 * from a cosine-distance radius via T = sqrt(2 * xi_cluster).
 */

#include "dgprm/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dgprm {

struct CFEntry {
    std::int64_t n = 0;
    EmbeddingVector ls; // linear sum, length d
    double ss = 0.0;    // sum of squared norms
    std::vector<std::string> member_ids;

    EmbeddingVector centroid() const;
    /// RMS distance of members from the centroid; clamped at 0 against
    /// floating-point cancellation.
    double radius() const;
    /// Radius the entry would have after absorbing x.
    double radius_with(const EmbeddingVector& x) const;
    void absorb(const EmbeddingVector& x, const std::string& id);
};

struct CFTreeParams {
    int branching_factor = 50;
    double euclidean_threshold = 0.0;

    static CFTreeParams from_cosine_radius(double xi_cluster, int branching_factor);
};

class CFTree {
public:
    explicit CFTree(CFTreeParams params);
    ~CFTree();
    CFTree(CFTree&&) noexcept;
    CFTree& operator=(CFTree&&) noexcept;

    /// Inserts one unit-normalized point. Throws DimensionMismatch when
    /// the length differs from previous insertions.
    void insert(const EmbeddingVector& point, const std::string& id);

    /// Leaf entries left to right; order is a pure function of the
    /// insertion sequence.
    std::vector<CFEntry> leaf_entries() const;

    std::int64_t total_points() const { return total_; }
    const CFTreeParams& params() const { return params_; }

private:
    struct Node;
    // Split outcome that must propagate into the parent node.
    struct SplitResult;

    SplitResult insert_into(Node& node, const EmbeddingVector& point, const std::string& id);
    static void collect_leaves(const Node& node, std::vector<CFEntry>& out);

    CFTreeParams params_;
    std::unique_ptr<Node> root_;
    std::int64_t total_ = 0;
    int dim_ = 0;
};

} // namespace dgprm
