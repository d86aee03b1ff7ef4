#include "dgprm/cftree.hpp"

#include "dgprm/errors.hpp"
#include "dgprm/geometry.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace dgprm {

namespace {

double sq_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace

EmbeddingVector CFEntry::centroid() const {
    EmbeddingVector c(ls.size());
    for (size_t i = 0; i < ls.size(); ++i) c[i] = ls[i] / static_cast<double>(n);
    return c;
}

double CFEntry::radius() const {
    const double inv_n = 1.0 / static_cast<double>(n);
    double centroid_sq = 0.0;
    for (double x : ls) centroid_sq += (x * inv_n) * (x * inv_n);
    double r2 = ss * inv_n - centroid_sq;
    if (r2 < 0.0) r2 = 0.0;
    return std::sqrt(r2);
}

double CFEntry::radius_with(const EmbeddingVector& x) const {
    CFEntry probe;
    probe.n = n + 1;
    probe.ls = ls;
    for (size_t i = 0; i < x.size(); ++i) probe.ls[i] += x[i];
    double xsq = 0.0;
    for (double v : x) xsq += v * v;
    probe.ss = ss + xsq;
    return probe.radius();
}

void CFEntry::absorb(const EmbeddingVector& x, const std::string& id) {
    if (n == 0) {
        ls.assign(x.size(), 0.0);
    } else if (ls.size() != x.size()) {
        throw DimensionMismatch("cf entry: point length " + std::to_string(x.size()) +
                                " != " + std::to_string(ls.size()));
    }
    ++n;
    double xsq = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        ls[i] += x[i];
        xsq += x[i] * x[i];
    }
    ss += xsq;
    member_ids.push_back(id);
}

CFTreeParams CFTreeParams::from_cosine_radius(double xi_cluster, int branching_factor) {
    if (!(xi_cluster > 0.0)) throw InvalidArgument("xi_cluster must be > 0");
    if (branching_factor < 2) throw InvalidArgument("branching_factor must be >= 2");
    CFTreeParams p;
    p.branching_factor = branching_factor;
    // ||a-b||^2 = 2 * cosine_distance(a, b) on unit vectors.
    p.euclidean_threshold = std::sqrt(2.0 * xi_cluster);
    return p;
}

struct CFTree::Node {
    bool leaf = true;
    std::vector<CFEntry> entries;
    std::vector<std::unique_ptr<Node>> children; // parallel to entries when !leaf
};

struct CFTree::SplitResult {
    bool split = false;
    CFEntry left_summary, right_summary;
    std::unique_ptr<Node> left, right;
};

CFTree::CFTree(CFTreeParams params) : params_(params), root_(std::make_unique<Node>()) {
    if (!(params_.euclidean_threshold > 0.0))
        throw InvalidArgument("cf tree: euclidean_threshold must be > 0");
}

CFTree::~CFTree() = default;
CFTree::CFTree(CFTree&&) noexcept = default;
CFTree& CFTree::operator=(CFTree&&) noexcept = default;

namespace {

/// Index of the entry whose centroid is nearest to the point; ties break
/// toward the lower index.
size_t nearest_entry(const std::vector<CFEntry>& entries, const EmbeddingVector& point) {
    size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < entries.size(); ++i) {
        const double d = sq_distance(entries[i].centroid(), point);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

CFEntry merge_summaries(const std::vector<CFEntry>& entries, const std::vector<size_t>& idx) {
    CFEntry out;
    for (size_t i : idx) {
        const CFEntry& e = entries[i];
        if (out.n == 0) {
            out.ls.assign(e.ls.size(), 0.0);
        }
        out.n += e.n;
        for (size_t k = 0; k < e.ls.size(); ++k) out.ls[k] += e.ls[k];
        out.ss += e.ss;
    }
    return out;
}

} // namespace

CFTree::SplitResult CFTree::insert_into(Node& node, const EmbeddingVector& point,
                                        const std::string& id) {
    if (node.leaf) {
        if (node.entries.empty()) {
            CFEntry e;
            e.absorb(point, id);
            node.entries.push_back(std::move(e));
        } else {
            const size_t i = nearest_entry(node.entries, point);
            if (node.entries[i].radius_with(point) <= params_.euclidean_threshold / 2.0) {
                node.entries[i].absorb(point, id);
            } else {
                CFEntry e;
                e.absorb(point, id);
                node.entries.push_back(std::move(e));
            }
        }
    } else {
        const size_t i = nearest_entry(node.entries, point);
        SplitResult child_split = insert_into(*node.children[i], point, id);
        if (child_split.split) {
            node.entries[i] = std::move(child_split.left_summary);
            node.children[i] = std::move(child_split.left);
            node.entries.insert(node.entries.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                std::move(child_split.right_summary));
            node.children.insert(node.children.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                 std::move(child_split.right));
        } else {
            // Keep the routing summary in sync with the subtree.
            CFEntry& e = node.entries[i];
            ++e.n;
            double xsq = 0.0;
            for (size_t k = 0; k < point.size(); ++k) {
                e.ls[k] += point[k];
                xsq += point[k] * point[k];
            }
            e.ss += xsq;
        }
    }

    SplitResult result;
    if (static_cast<int>(node.entries.size()) <= params_.branching_factor) return result;

    // Split: seeds are the two farthest entries; everything else joins
    // the nearer seed. Deterministic: ties break toward lower indices.
    size_t seed_a = 0, seed_b = 1;
    double best_d = -1.0;
    std::vector<EmbeddingVector> centroids(node.entries.size());
    for (size_t i = 0; i < node.entries.size(); ++i) centroids[i] = node.entries[i].centroid();
    for (size_t i = 0; i < node.entries.size(); ++i) {
        for (size_t j = i + 1; j < node.entries.size(); ++j) {
            const double d = sq_distance(centroids[i], centroids[j]);
            if (d > best_d) {
                best_d = d;
                seed_a = i;
                seed_b = j;
            }
        }
    }

    std::vector<size_t> left_idx, right_idx;
    for (size_t i = 0; i < node.entries.size(); ++i) {
        if (i == seed_a) {
            left_idx.push_back(i);
        } else if (i == seed_b) {
            right_idx.push_back(i);
        } else if (sq_distance(centroids[i], centroids[seed_a]) <=
                   sq_distance(centroids[i], centroids[seed_b])) {
            left_idx.push_back(i);
        } else {
            right_idx.push_back(i);
        }
    }

    auto make_side = [&](const std::vector<size_t>& idx) {
        auto side = std::make_unique<Node>();
        side->leaf = node.leaf;
        for (size_t i : idx) {
            side->entries.push_back(std::move(node.entries[i]));
            if (!node.leaf) side->children.push_back(std::move(node.children[i]));
        }
        return side;
    };

    result.split = true;
    result.left_summary = merge_summaries(node.entries, left_idx);
    result.right_summary = merge_summaries(node.entries, right_idx);
    result.left = make_side(left_idx);
    result.right = make_side(right_idx);
    return result;
}

void CFTree::insert(const EmbeddingVector& point, const std::string& id) {
    if (point.empty()) throw DimensionMismatch("cf insert: empty point");
    if (dim_ == 0) {
        dim_ = static_cast<int>(point.size());
    } else if (static_cast<int>(point.size()) != dim_) {
        throw DimensionMismatch("cf insert: point length " + std::to_string(point.size()) +
                                " != tree dim " + std::to_string(dim_));
    }
    require_finite(point, "cf insert");

    SplitResult split = insert_into(*root_, point, id);
    if (split.split) {
        auto new_root = std::make_unique<Node>();
        new_root->leaf = false;
        new_root->entries.push_back(std::move(split.left_summary));
        new_root->entries.push_back(std::move(split.right_summary));
        new_root->children.push_back(std::move(split.left));
        new_root->children.push_back(std::move(split.right));
        root_ = std::move(new_root);
    }
    ++total_;
}

void CFTree::collect_leaves(const Node& node, std::vector<CFEntry>& out) {
    if (node.leaf) {
        for (const auto& e : node.entries) out.push_back(e);
        return;
    }
    for (const auto& child : node.children) collect_leaves(*child, out);
}

std::vector<CFEntry> CFTree::leaf_entries() const {
    std::vector<CFEntry> out;
    collect_leaves(*root_, out);
    return out;
}

} // namespace dgprm
