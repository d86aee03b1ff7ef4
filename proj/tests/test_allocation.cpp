#include <dgprm/allocation.hpp>
#include <dgprm/errors.hpp>
#include <dgprm/geometry.hpp>
#include <dgprm/mock_backend.hpp>

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "support.hpp"

using namespace dgprm;

namespace {

Criterion child(const std::string& id, const std::string& text, EmbeddingVector emb) {
    Criterion c;
    c.id = id;
    c.text = text;
    c.embedding = std::move(emb);
    c.source_ids = {"src"};
    return c;
}

RewardTree small_tree() {
    RewardTree t;
    t.dim = 16;
    t.xi = 0.25;
    t.xi_cluster = 0.5;
    t.embedding_model = "mock";
    ParentNode p1{"P1", "logical consistency of the step", mock_embed("p1", 16, 0), {}};
    p1.children.push_back(child("r1", "criterion one", mock_embed("child r1", 16, 0)));
    p1.children.push_back(child("r2", "criterion two", mock_embed("child r2", 16, 0)));
    ParentNode p2{"P2", "calculation accuracy", mock_embed("p2", 16, 0), {}};
    p2.children.push_back(child("r3", "criterion three", mock_embed("child r3", 16, 0)));
    ParentNode p3{"P3", "clarity of exposition", mock_embed("p3", 16, 0), {}};
    p3.children.push_back(child("r4", "criterion four", mock_embed("child r4", 16, 0)));
    t.parents = {p1, p2, p3};
    return t;
}

MockCompletionBackend scripted(const test::TempDir& dir, const std::string& rules_json,
                               const std::string& name = "script.json") {
    const auto path = dir.file(name);
    test::write_file(path, R"({"version": "dgprm-mock/1", "rules": )" + rules_json + "}");
    return MockCompletionBackend::from_script(path);
}

std::vector<StepRecord> history_of(int n) {
    std::vector<StepRecord> h;
    for (int i = 1; i <= n; ++i)
        h.push_back({i, "step text " + std::to_string(i), {}});
    return h;
}

} // namespace

TEST_CASE("context windows match the step-window rule") {
    // t = 1: no predecessors.
    CHECK(build_context({}, 1, 20).entries.empty());

    // t = 3: steps 1..2.
    const auto c3 = build_context(history_of(2), 3, 20);
    REQUIRE(c3.entries.size() == 2);
    CHECK(c3.entries[0].step_index == 1);
    CHECK(c3.entries[1].step_index == 2);

    // t = 25, mu = 20: steps 5..24, exactly 20 entries.
    const auto c25 = build_context(history_of(24), 25, 20);
    REQUIRE(c25.entries.size() == 20);
    CHECK(c25.entries.front().step_index == 5);
    CHECK(c25.entries.back().step_index == 24);

    // Missing step 2 in history.
    std::vector<StepRecord> gappy = {{1, "one", {}}, {3, "three", {}}};
    CHECK_THROWS_AS(build_context(gappy, 4, 20), HistoryGap);
}

TEST_CASE("vote threshold: kept iff votes >= vote_keep, ordered by count") {
    test::TempDir dir("votes");
    // Five samples: P1 x5, P2 x3, P3 x1.
    auto backend = scripted(dir, R"([
      {"role": "selector", "outputs": ["[P1, P2]", "[P1, P2, P3]", "[P1]", "[P1, P2]", "[P1]"]}
    ])");
    PipelineConfig cfg;
    cfg.dim = 16;
    const auto tree = small_tree();
    const auto parents = select_parents("a step", tree, {}, cfg, backend);
    REQUIRE(parents.size() == 2);
    CHECK(parents[0].id == "P1");
    CHECK(parents[1].id == "P2");
}

TEST_CASE("votes below the threshold select nothing") {
    test::TempDir dir("votes2");
    auto backend = scripted(dir, R"([
      {"role": "selector", "outputs": ["[P1]", "[]", "[P1]", "[]", "[]"]}
    ])");
    PipelineConfig cfg;
    cfg.dim = 16;
    const auto parents = select_parents("a step", small_tree(), {}, cfg, backend);
    CHECK(parents.empty());
}

TEST_CASE("unanimous empty votes and summary-name votes") {
    test::TempDir dir("votes3");
    auto empty_backend = scripted(dir, R"([
      {"role": "selector", "outputs": ["[]"]}
    ])", "empty.json");
    PipelineConfig cfg;
    cfg.dim = 16;
    CHECK(select_parents("s", small_tree(), {}, cfg, empty_backend).empty());

    // Exact summary text matches count as votes too.
    auto summary_backend = scripted(dir, R"([
      {"role": "selector", "outputs": ["[calculation accuracy]"]}
    ])", "summary.json");
    cfg.vote_samples = 1;
    cfg.vote_keep = 1;
    const auto parents = select_parents("s", small_tree(), {}, cfg, summary_backend);
    REQUIRE(parents.size() == 1);
    CHECK(parents[0].id == "P2");
}

TEST_CASE("selector ties break in tree order") {
    test::TempDir dir("votes4");
    auto backend = scripted(dir, R"([
      {"role": "selector", "outputs": ["[P3, P1]", "[P1, P3]", "[P3, P1]", "[]", "[]"]}
    ])");
    PipelineConfig cfg;
    cfg.dim = 16;
    const auto parents = select_parents("s", small_tree(), {}, cfg, backend);
    REQUIRE(parents.size() == 2);
    CHECK(parents[0].id == "P1"); // equal votes, P1 earlier in the tree
    CHECK(parents[1].id == "P3");
}

TEST_CASE("malformed selector sample raises") {
    test::TempDir dir("votes5");
    auto backend = scripted(dir, R"([
      {"role": "selector", "outputs": ["P1 and P2, no brackets"]}
    ])");
    PipelineConfig cfg;
    cfg.dim = 16;
    CHECK_THROWS_AS(select_parents("s", small_tree(), {}, cfg, backend), MalformedResponse);
}

TEST_CASE("aspect generation: bullets, NONE, duplicates") {
    test::TempDir dir("aspects");
    auto backend = scripted(dir, R"([
      {"role": "aspect", "contains": "logical consistency", "outputs": ["- handles units\n- handles units\n- checks signs"]},
      {"role": "aspect", "outputs": ["NONE"]}
    ])");
    PipelineConfig cfg;
    const auto tree = small_tree();
    const auto with = generate_aspects("step", tree.parents[0], cfg, backend);
    CHECK(with.parent_id == "P1");
    CHECK(with.aspects == std::vector<std::string>{"handles units", "checks signs"});

    const auto without = generate_aspects("step", tree.parents[1], cfg, backend);
    CHECK(without.aspects.empty());
}

TEST_CASE("child matching honors zeta and unions over aspects") {
    PipelineConfig cfg;
    cfg.dim = 4;
    // Hand-built geometry: child at distance 0.15 of the aspect.
    RewardTree t;
    t.dim = 4;
    ParentNode p{"P1", "summary", {1, 0, 0, 0}, {}};
    const double c = 0.85; // cos such that distance = 0.15
    p.children.push_back(child("near", "near child", {c, std::sqrt(1 - c * c), 0, 0}));
    const double f = 0.75; // distance 0.25
    p.children.push_back(child("far", "far child", {f, std::sqrt(1 - f * f), 0, 0}));
    t.parents = {p};

    // Embedding backend that maps the aspect text to e1 exactly.
    class FixedEmbed final : public EmbeddingBackend {
    public:
        std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                           const std::string&) override {
            std::vector<EmbeddingVector> out;
            for (const auto& text : texts) {
                if (text == "axis") out.push_back({1, 0, 0, 0});
                else out.push_back({0, 0, 1, 0});
            }
            return out;
        }
        std::string kind() const override { return "fixed"; }
        int dim() const override { return 4; }
    } embedder;

    const auto hit = match_children({"P1", {"axis"}}, p, 0.2, cfg, embedder);
    REQUIRE(hit.size() == 1);
    CHECK(hit[0].id == "near");

    // Child within zeta of two aspects appears once.
    const auto twice = match_children({"P1", {"axis", "axis"}}, p, 0.2, cfg, embedder);
    CHECK(twice.size() == 1);

    // Empty aspect set selects nothing.
    CHECK(match_children({"P1", {}}, p, 0.2, cfg, embedder).empty());

    CHECK_THROWS_AS(match_children({"P2", {"axis"}}, p, 0.2, cfg, embedder), InvalidArgument);
}

TEST_CASE("zeta monotonicity of match_children") {
    PipelineConfig cfg;
    cfg.dim = 16;
    MockEmbeddingBackend embedder(16, 11);
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> zeta_draw(0.0, 2.0);

    for (int it = 0; it < 100; ++it) {
        ParentNode p{"P", "s", mock_embed("parent" + std::to_string(it), 16, 11), {}};
        for (int i = 0; i < 6; ++i) {
            const auto id = "ch" + std::to_string(it) + "-" + std::to_string(i);
            p.children.push_back(child(id, id + " text", mock_embed(id + " text", 16, 11)));
        }
        AspectSet aspects{"P", {}};
        for (int i = 0; i < 3; ++i)
            aspects.aspects.push_back("aspect " + std::to_string(it) + "-" + std::to_string(i));

        double za = zeta_draw(rng), zb = zeta_draw(rng);
        if (za > zb) std::swap(za, zb);
        const auto small = match_children(aspects, p, za, cfg, embedder);
        const auto large = match_children(aspects, p, zb, cfg, embedder);
        // Every id selected at the tighter threshold stays selected.
        for (const auto& s : small) {
            bool found = false;
            for (const auto& l : large)
                if (l.id == s.id) found = true;
            CHECK(found);
        }
        CHECK(small.size() <= large.size());
    }
}

TEST_CASE("scoring parses the marker and enforces range") {
    test::TempDir dir("score");
    auto backend = scripted(dir, R"([
      {"role": "scorer", "contains": "criterion one", "outputs": ["solid work\nScore: [[7]]"]},
      {"role": "scorer", "contains": "criterion two", "outputs": ["Score: [[11]]"]},
      {"role": "scorer", "outputs": ["no marker"]}
    ])");
    PipelineConfig cfg;
    const auto s = score_criterion("r1", "criterion one", ScoreKind::Fine, "step", {}, cfg,
                                   backend);
    CHECK(s.criterion_id == "r1");
    CHECK(s.score == 7);
    CHECK(s.rationale == "solid work");
    CHECK(s.kind == ScoreKind::Fine);

    CHECK_THROWS_AS(score_criterion("r2", "criterion two", ScoreKind::Fine, "step", {}, cfg,
                                    backend),
                    ScoreOutOfRange);
    CHECK_THROWS_AS(score_criterion("rx", "other", ScoreKind::Fine, "step", {}, cfg, backend),
                    MalformedResponse);
}

TEST_CASE("allocate_step: coarse-only, fine, and fallback paths") {
    test::TempDir dir("alloc");
    // P1 voted in with aspects matching children; P2 voted in with NONE
    // (coarse only); P3 voted in with aspects that match nothing.
    auto backend = scripted(dir, R"([
      {"role": "selector", "outputs": ["[P1, P2, P3]"]},
      {"role": "aspect", "contains": "logical consistency", "outputs": ["- criterion one aspect"]},
      {"role": "aspect", "contains": "calculation accuracy", "outputs": ["NONE"]},
      {"role": "aspect", "contains": "clarity", "outputs": ["- totally unrelated direction"]},
      {"role": "scorer", "contains": "criterion one", "outputs": ["fine\nScore: [[8]]"]},
      {"role": "scorer", "contains": "calculation accuracy", "outputs": ["coarse\nScore: [[6]]"]},
      {"role": "scorer", "contains": "clarity", "outputs": ["fallback\nScore: [[4]]"]}
    ])");

    PipelineConfig cfg;
    cfg.dim = 16;
    cfg.zeta = 0.2;

    // Tree whose child embeddings are controlled: r1 embeds exactly like
    // the aspect text so it matches; others stay orthogonal.
    RewardTree tree = small_tree();
    tree.parents[0].children[0].embedding = mock_embed("criterion one aspect", 16, 0);

    MockEmbeddingBackend embedder(16, 0);
    AllocationBackends backends{backend, embedder};
    const auto out = allocate_step("the step", "t1", 1, "c1", tree, {}, cfg, backends);

    REQUIRE(out.scores.size() == 3);
    CHECK(out.scores[0].criterion_id == "r1");
    CHECK(out.scores[0].kind == ScoreKind::Fine);
    CHECK(out.scores[0].score == 8);
    CHECK(out.scores[1].criterion_id == "coarse:P2");
    CHECK(out.scores[1].kind == ScoreKind::Coarse);
    CHECK(out.scores[1].score == 6);
    CHECK(out.scores[2].criterion_id == "coarse:P3"); // zero matches -> coarse fallback
    CHECK(out.scores[2].kind == ScoreKind::Coarse);
    CHECK(out.scores[2].score == 4);

    // One entry per criterion id.
    std::set<std::string> ids;
    for (const auto& s : out.scores) CHECK(ids.insert(s.criterion_id).second);
}

TEST_CASE("zero selected parents yields an empty score list") {
    test::TempDir dir("alloc0");
    auto backend = scripted(dir, R"([
      {"role": "selector", "outputs": ["[]"]}
    ])");
    PipelineConfig cfg;
    cfg.dim = 16;
    MockEmbeddingBackend embedder(16, 0);
    AllocationBackends backends{backend, embedder};
    const auto out = allocate_step("step", "t", 1, "c1", small_tree(), {}, cfg, backends);
    CHECK(out.scores.empty());
}

TEST_CASE("allocate_trajectory: union top-up makes candidates commensurable") {
    test::TempDir dir("traj");
    // Two candidates at one step; selector picks P1 for candidate one and
    // P2 for candidate two, so each candidate gets topped up with the
    // other parent's coarse criterion.
    auto backend = scripted(dir, R"([
      {"role": "selector", "contains": "candidate one", "outputs": ["[P1]"]},
      {"role": "selector", "contains": "candidate two", "outputs": ["[P2]"]},
      {"role": "aspect", "outputs": ["NONE"]},
      {"role": "scorer", "contains": ["logical consistency", "candidate one"], "outputs": ["Score: [[9]]"]},
      {"role": "scorer", "contains": ["calculation accuracy", "candidate one"], "outputs": ["Score: [[8]]"]},
      {"role": "scorer", "contains": ["logical consistency", "candidate two"], "outputs": ["Score: [[5]]"]},
      {"role": "scorer", "contains": ["calculation accuracy", "candidate two"], "outputs": ["Score: [[4]]"]}
    ])");

    PipelineConfig cfg;
    cfg.dim = 16;
    MockEmbeddingBackend embedder(16, 0);
    AllocationBackends backends{backend, embedder};

    Trajectory traj;
    traj.id = "t1";
    traj.steps = {"candidate one"};
    traj.step_candidates = {{"candidate one", "candidate two"}};

    const auto scored = allocate_trajectory(traj, small_tree(), cfg, backends);
    REQUIRE(scored.size() == 2);
    REQUIRE(scored[0].scores.size() == 2);
    REQUIRE(scored[1].scores.size() == 2);
    // Same criterion set, same order after the union pass.
    CHECK(scored[0].scores[0].criterion_id == "coarse:P1");
    CHECK(scored[0].scores[1].criterion_id == "coarse:P2");
    CHECK(scored[1].scores[0].criterion_id == "coarse:P2");
    CHECK(scored[1].scores[1].criterion_id == "coarse:P1");
    CHECK(scored[0].candidate_id == "c1");
    CHECK(scored[1].candidate_id == "c2");
}

TEST_CASE("allocate_trajectory threads the designated history forward") {
    test::TempDir dir("hist");
    // Step 2's selector sees step 1's designated text in its context.
    auto backend = scripted(dir, R"([
      {"role": "selector", "contains": ["[step 1] first step text", "second step"], "outputs": ["[P2]"]},
      {"role": "selector", "outputs": ["[P1]"]},
      {"role": "aspect", "outputs": ["NONE"]},
      {"role": "scorer", "outputs": ["Score: [[7]]"]}
    ])");
    PipelineConfig cfg;
    cfg.dim = 16;
    MockEmbeddingBackend embedder(16, 0);
    AllocationBackends backends{backend, embedder};

    Trajectory traj;
    traj.id = "t1";
    traj.steps = {"first step text", "second step"};

    const auto scored = allocate_trajectory(traj, small_tree(), cfg, backends);
    REQUIRE(scored.size() == 2);
    CHECK(scored[0].scores[0].criterion_id == "coarse:P1");
    CHECK(scored[1].scores[0].criterion_id == "coarse:P2"); // context-dependent rule fired
}

TEST_CASE("n=1 with two candidates: both scored against an empty context") {
    test::TempDir dir("n1");
    auto backend = scripted(dir, R"([
      {"role": "selector", "outputs": ["[P1]"]},
      {"role": "aspect", "outputs": ["NONE"]},
      {"role": "scorer", "contains": "No previous steps", "outputs": ["Score: [[6]]"]}
    ])");
    PipelineConfig cfg;
    cfg.dim = 16;
    MockEmbeddingBackend embedder(16, 0);
    AllocationBackends backends{backend, embedder};

    Trajectory traj;
    traj.id = "t";
    traj.steps = {"only step"};
    traj.step_candidates = {{"cand a", "cand b"}};
    const auto scored = allocate_trajectory(traj, small_tree(), cfg, backends);
    REQUIRE(scored.size() == 2);
    for (const auto& s : scored) {
        CHECK(s.step_index == 1);
        CHECK(s.scores.size() == 1);
        CHECK(s.scores[0].score == 6); // the empty-context rule matched
    }
}

TEST_CASE("selected criteria always map back into the tree") {
    const auto tree = small_tree();
    const auto texts = criterion_texts(tree);
    CHECK(texts.at("r1").first == "criterion one");
    CHECK(texts.at("r1").second == ScoreKind::Fine);
    CHECK(texts.at("coarse:P2").first == "calculation accuracy");
    CHECK(texts.at("coarse:P2").second == ScoreKind::Coarse);
    CHECK(texts.size() == 7); // 3 coarse + 4 fine
}
