#include <dgprm/errors.hpp>
#include <dgprm/extraction.hpp>
#include <dgprm/mock_backend.hpp>

#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace dgprm;

namespace {

MockCompletionBackend scripted(const test::TempDir& dir, const std::string& rules_json) {
    const auto path = dir.file("script.json");
    test::write_file(path, R"({"version": "dgprm-mock/1", "rules": )" + rules_json + "}");
    return MockCompletionBackend::from_script(path);
}

} // namespace

TEST_CASE("judge bullets become criteria in order") {
    test::TempDir dir("extract");
    auto backend = scripted(dir, R"([
      {"role": "judge", "outputs": ["- checks unit consistency\n- cites the governing equation\n- identifies the wrong step"]}
    ])");
    PipelineConfig cfg;
    const auto out = extract_criteria({"pair-1", "input", "good", "bad"}, backend, cfg);
    REQUIRE(out.size() == 3);
    CHECK(out[0].id == "pair-1-c1");
    CHECK(out[0].text == "checks unit consistency");
    CHECK(out[2].text == "identifies the wrong step");
    for (const auto& c : out) {
        CHECK(c.verdict == Verdict::Unvalidated);
        CHECK(c.source_ids == std::vector<std::string>{"pair-1"});
    }
    // Pairwise distinct texts.
    for (size_t i = 0; i < out.size(); ++i)
        for (size_t j = i + 1; j < out.size(); ++j) CHECK(out[i].text != out[j].text);
}

TEST_CASE("explicit empty list is valid, prose is not") {
    test::TempDir dir("extract2");
    auto backend = scripted(dir, R"([
      {"role": "judge", "contains": "pair-empty", "outputs": ["NONE"]},
      {"role": "judge", "outputs": ["no list at all, just prose"]}
    ])");
    PipelineConfig cfg;
    CHECK(extract_criteria({"p1", "pair-empty input", "p", "n"}, backend, cfg).empty());
    CHECK_THROWS_AS(extract_criteria({"p2", "other input", "p", "n"}, backend, cfg),
                    MalformedResponse);
}

TEST_CASE("duplicate bullets collapse") {
    test::TempDir dir("extract3");
    auto backend = scripted(dir, R"([
      {"role": "judge", "outputs": ["- same criterion\n- same criterion"]}
    ])");
    PipelineConfig cfg;
    const auto out = extract_criteria({"p", "i", "pos", "neg"}, backend, cfg);
    CHECK(out.size() == 1);
}

TEST_CASE("validator label parsing end to end") {
    test::TempDir dir("validate");
    auto backend = scripted(dir, R"([
      {"role": "validator", "contains": "vague criterion", "outputs": ["leans generic...\nOutput: [[Ordinary]]"]},
      {"role": "validator", "contains": "irrelevant criterion", "outputs": ["[[Bad]]"]},
      {"role": "validator", "contains": "broken", "outputs": ["no label here"]},
      {"role": "validator", "outputs": ["Output: [[Good]]"]}
    ])");
    PipelineConfig cfg;
    Criterion c;
    c.id = "c1";
    c.text = "solid criterion";
    CHECK(validate_criterion(c, backend, cfg) == Verdict::Good);
    c.text = "vague criterion";
    CHECK(validate_criterion(c, backend, cfg) == Verdict::Ordinary);
    c.text = "irrelevant criterion";
    CHECK(validate_criterion(c, backend, cfg) == Verdict::Bad);
    c.text = "broken";
    CHECK_THROWS_AS(validate_criterion(c, backend, cfg), MalformedResponse);
}

TEST_CASE("filter semantics") {
    auto make = [](const std::string& id, Verdict v) {
        Criterion c;
        c.id = id;
        c.text = id + " text";
        c.source_ids = {"s"};
        c.verdict = v;
        return c;
    };
    const std::vector<Criterion> cs = {make("a", Verdict::Good), make("b", Verdict::Bad),
                                       make("c", Verdict::Ordinary)};

    const auto kept = filter_criteria(cs, {Verdict::Good, Verdict::Ordinary});
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == "a");
    CHECK(kept[1].id == "c");

    CHECK(filter_criteria({make("a", Verdict::Bad)}, {Verdict::Good}).empty());

    const std::vector<Criterion> unvalidated = {make("u", Verdict::Unvalidated)};
    CHECK_THROWS_AS(filter_criteria(unvalidated, {Verdict::Good}), UnvalidatedCriterion);
}

TEST_CASE("kept + dropped = total over random verdict assignments") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 2);
    for (int it = 0; it < 100; ++it) {
        std::vector<Criterion> cs;
        for (int i = 0; i < 20; ++i) {
            Criterion c;
            c.id = "c" + std::to_string(i);
            c.text = "t" + std::to_string(i);
            c.verdict = static_cast<Verdict>(pick(rng)); // Good/Ordinary/Bad
            cs.push_back(std::move(c));
        }
        const auto kept = filter_criteria(cs, {Verdict::Good, Verdict::Ordinary});
        const auto dropped = filter_criteria(cs, {Verdict::Bad});
        CHECK(kept.size() + dropped.size() == cs.size());
        // Order preservation within the kept list.
        for (size_t i = 1; i < kept.size(); ++i) {
            const int prev = std::stoi(kept[i - 1].id.substr(1));
            const int cur = std::stoi(kept[i].id.substr(1));
            CHECK(prev < cur);
        }
    }
}

TEST_CASE("extract_all keeps input order under parallelism") {
    test::TempDir dir("par");
    auto backend = scripted(dir, R"([
      {"role": "judge", "contains": "pair-a", "outputs": ["- from a"]},
      {"role": "judge", "contains": "pair-b", "outputs": ["- from b one\n- from b two"]},
      {"role": "judge", "outputs": ["- generic"]}
    ])");
    PipelineConfig cfg;
    cfg.backend.max_inflight = 8;
    std::vector<ComparisonPair> pairs;
    pairs.push_back({"pair-a", "pair-a input", "p", "n"});
    pairs.push_back({"pair-b", "pair-b input", "p", "n"});
    pairs.push_back({"pair-c", "pair-c input", "p", "n"});
    const auto out = extract_all(pairs, backend, cfg);
    REQUIRE(out.size() == 4);
    CHECK(out[0].id == "pair-a-c1");
    CHECK(out[1].id == "pair-b-c1");
    CHECK(out[2].id == "pair-b-c2");
    CHECK(out[3].id == "pair-c-c1");
}
