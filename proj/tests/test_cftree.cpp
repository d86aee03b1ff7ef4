#include <dgprm/cftree.hpp>
#include <dgprm/errors.hpp>
#include <dgprm/geometry.hpp>
#include <dgprm/mock_backend.hpp>

#include <doctest.h>

#include <cmath>
#include <map>

#include "support.hpp"

using namespace dgprm;

TEST_CASE("threshold conversion from cosine radius") {
    const auto p = CFTreeParams::from_cosine_radius(0.5, 50);
    CHECK(p.euclidean_threshold == doctest::Approx(1.0));
    const auto q = CFTreeParams::from_cosine_radius(0.25, 50);
    CHECK(q.euclidean_threshold == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("coincident points collapse into one entry with radius 0") {
    CFTree tree(CFTreeParams::from_cosine_radius(0.5, 50));
    tree.insert({1, 0}, "a");
    tree.insert({1, 0}, "b");
    const auto leaves = tree.leaf_entries();
    REQUIRE(leaves.size() == 1);
    CHECK(leaves[0].n == 2);
    CHECK(leaves[0].radius() == doctest::Approx(0.0));
    CHECK(leaves[0].member_ids == std::vector<std::string>{"a", "b"});
}

TEST_CASE("entry centroid is the running mean") {
    CFEntry e;
    e.absorb({1, 0}, "a");
    e.absorb({0, 1}, "b");
    const auto c = e.centroid();
    CHECK(c[0] == doctest::Approx(0.5));
    CHECK(c[1] == doctest::Approx(0.5));
}

TEST_CASE("dimension mismatches are rejected") {
    CFTree tree(CFTreeParams::from_cosine_radius(0.5, 50));
    tree.insert({1, 0, 0}, "a");
    CHECK_THROWS_AS(tree.insert({1, 0}, "b"), DimensionMismatch);
}

TEST_CASE("all points land within the threshold of their entry centroid") {
    const auto params = CFTreeParams::from_cosine_radius(0.5, 50);
    CFTree tree(params);
    std::map<std::string, EmbeddingVector> points;
    for (int i = 0; i < 300; ++i) {
        const auto id = "p" + std::to_string(i);
        const auto v = mock_embed(id, 16, 1);
        points[id] = v;
        tree.insert(v, id);
    }
    const auto leaves = tree.leaf_entries();

    std::int64_t total = 0;
    for (const auto& entry : leaves) {
        total += entry.n;
        CHECK(entry.n == static_cast<std::int64_t>(entry.member_ids.size()));
        const auto centroid = entry.centroid();
        for (const auto& id : entry.member_ids) {
            double sq = 0.0;
            const auto& x = points.at(id);
            for (size_t k = 0; k < x.size(); ++k)
                sq += (x[k] - centroid[k]) * (x[k] - centroid[k]);
            CHECK(std::sqrt(sq) <= params.euclidean_threshold + 1e-9);
        }
    }
    CHECK(total == 300);
    CHECK(total == tree.total_points());
}

TEST_CASE("two far clusters resolve to exactly two leaf entries") {
    // Tight bundles around two orthogonal anchors.
    const auto params = CFTreeParams::from_cosine_radius(0.5, 50);
    CFTree tree(params);
    const auto anchor_a = mock_embed("anchor-a", 16, 2);
    const auto anchor_b = mock_embed("anchor-b", 16, 2);
    std::map<std::string, char> expected;
    for (int i = 0; i < 20; ++i) {
        const auto wiggle = mock_embed("wiggle" + std::to_string(i), 16, 3);
        EmbeddingVector a(16), b(16);
        for (int k = 0; k < 16; ++k) {
            a[static_cast<size_t>(k)] = anchor_a[static_cast<size_t>(k)] + 0.02 * wiggle[static_cast<size_t>(k)];
            b[static_cast<size_t>(k)] = anchor_b[static_cast<size_t>(k)] + 0.02 * wiggle[static_cast<size_t>(k)];
        }
        tree.insert(normalize(a), "a" + std::to_string(i));
        tree.insert(normalize(b), "b" + std::to_string(i));
        expected["a" + std::to_string(i)] = 'a';
        expected["b" + std::to_string(i)] = 'b';
    }
    const auto leaves = tree.leaf_entries();
    REQUIRE(leaves.size() == 2);
    // Oracle: membership by nearest cluster anchor.
    for (const auto& entry : leaves) {
        char bucket = expected.at(entry.member_ids.front());
        for (const auto& id : entry.member_ids) CHECK(expected.at(id) == bucket);
        CHECK(entry.n == 20);
    }
}

TEST_CASE("node splits keep every point exactly once") {
    // Branching factor 2 forces frequent splits.
    auto params = CFTreeParams::from_cosine_radius(0.05, 2);
    CFTree tree(params);
    std::map<std::string, int> inserted;
    for (int i = 0; i < 120; ++i) {
        const auto id = "q" + std::to_string(i);
        tree.insert(mock_embed(id, 8, 4), id);
        inserted[id] = 1;
    }
    std::int64_t total = 0;
    std::map<std::string, int> seen;
    for (const auto& entry : tree.leaf_entries()) {
        total += entry.n;
        for (const auto& id : entry.member_ids) ++seen[id];
    }
    CHECK(total == 120);
    CHECK(seen == inserted); // each id exactly once
}

TEST_CASE("insertion order determines the structure deterministically") {
    auto build = [] {
        CFTree tree(CFTreeParams::from_cosine_radius(0.3, 4));
        for (int i = 0; i < 50; ++i)
            tree.insert(mock_embed("d" + std::to_string(i), 8, 6), "d" + std::to_string(i));
        return tree.leaf_entries();
    };
    const auto a = build();
    const auto b = build();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].member_ids == b[i].member_ids);
        CHECK(a[i].ls == b[i].ls);
    }
}
