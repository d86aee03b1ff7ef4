#include "dgprm/extraction.hpp"

#include "dgprm/errors.hpp"
#include "dgprm/parallel.hpp"
#include "dgprm/prompts.hpp"

namespace dgprm {

std::vector<Criterion> extract_criteria(const ComparisonPair& pair,
                                        CompletionBackend& backend,
                                        const PipelineConfig& cfg) {
    if (pair.positive == pair.negative)
        throw InvalidArgument("comparison pair " + pair.id + ": positive == negative");

    CompletionRequest req;
    req.model = cfg.backend.completion_model;
    req.prompt = render_judge_prompt(pair);
    req.temperature = cfg.temp_judge;
    req.n_samples = 1;
    req.max_output_tokens = cfg.max_output_tokens;
    const auto resp = backend.complete(req);

    const auto items = parse_bullet_list(resp.texts.at(0));
    if (!items)
        throw MalformedResponse("judge response for pair " + pair.id +
                                " carries no criterion list");

    std::vector<Criterion> out;
    out.reserve(items->size());
    int n = 0;
    for (const auto& text : *items) {
        Criterion c;
        c.id = pair.id + "-c" + std::to_string(++n);
        c.text = text;
        c.source_ids = {pair.id};
        c.verdict = Verdict::Unvalidated;
        out.push_back(std::move(c));
    }
    return out;
}

Verdict validate_criterion(const Criterion& c, CompletionBackend& backend,
                           const PipelineConfig& cfg) {
    if (c.text.empty()) throw InvalidArgument("validate_criterion: empty text");

    CompletionRequest req;
    req.model = cfg.backend.completion_model;
    req.prompt = render_validator_prompt(c.text);
    req.temperature = cfg.temp_validator;
    req.n_samples = 1;
    req.max_output_tokens = cfg.max_output_tokens;
    const auto resp = backend.complete(req);
    return parse_verdict(resp.texts.at(0));
}

std::vector<Criterion> filter_criteria(const std::vector<Criterion>& cs,
                                       const std::set<Verdict>& keep) {
    for (const auto& c : cs) {
        if (c.verdict == Verdict::Unvalidated)
            throw UnvalidatedCriterion("criterion " + c.id + " has no verdict");
    }
    std::vector<Criterion> out;
    for (const auto& c : cs) {
        if (keep.count(c.verdict)) out.push_back(c);
    }
    return out;
}

std::vector<Criterion> extract_all(const std::vector<ComparisonPair>& pairs,
                                   CompletionBackend& backend, const PipelineConfig& cfg) {
    auto per_pair = parallel_map<std::vector<Criterion>>(
        pairs.size(), cfg.backend.max_inflight,
        [&](size_t i) { return extract_criteria(pairs[i], backend, cfg); });
    std::vector<Criterion> out;
    for (auto& batch : per_pair)
        for (auto& c : batch) out.push_back(std::move(c));
    return out;
}

std::vector<Criterion> validate_all(const std::vector<Criterion>& cs,
                                    CompletionBackend& backend, const PipelineConfig& cfg) {
    auto verdicts = parallel_map<Verdict>(
        cs.size(), cfg.backend.max_inflight,
        [&](size_t i) { return validate_criterion(cs[i], backend, cfg); });
    std::vector<Criterion> out = cs;
    for (size_t i = 0; i < out.size(); ++i) out[i].verdict = verdicts[i];
    return out;
}

} // namespace dgprm
