#include "dgprm/allocation.hpp"

#include "dgprm/errors.hpp"
#include "dgprm/geometry.hpp"
#include "dgprm/pareto.hpp"
#include "dgprm/prompts.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace dgprm {

StepContext build_context(const std::vector<StepRecord>& history, int t, int mu) {
    if (t < 1) throw InvalidArgument("build_context: t must be >= 1");
    if (mu < 1) throw InvalidArgument("build_context: mu must be >= 1");

    std::map<int, const StepRecord*> by_index;
    for (const auto& rec : history) by_index[rec.step_index] = &rec;

    StepContext ctx;
    const int lo = std::max(1, t - mu);
    for (int i = lo; i <= t - 1; ++i) {
        const auto it = by_index.find(i);
        if (it == by_index.end())
            throw HistoryGap("context for step " + std::to_string(t) + " is missing step " +
                             std::to_string(i));
        ctx.entries.push_back({i, it->second->step_text, it->second->scores});
    }
    return ctx;
}

std::vector<ParentNode> select_parents(const std::string& step, const RewardTree& tree,
                                       const StepContext& ctx, const PipelineConfig& cfg,
                                       CompletionBackend& completer) {
    if (tree.parents.empty()) throw InvalidArgument("select_parents: empty tree");

    CompletionRequest req;
    req.model = cfg.backend.completion_model;
    req.prompt = render_selector_prompt(step, tree.parents, ctx);
    req.temperature = cfg.temp_selector;
    req.n_samples = cfg.vote_samples;
    req.max_output_tokens = cfg.max_output_tokens;
    const auto resp = completer.complete(req);

    // Tree-order vote counts; unknown tokens are ignored and one sample
    // cannot vote for the same parent twice.
    std::vector<int> votes(tree.parents.size(), 0);
    for (const auto& text : resp.texts) {
        const auto tokens = parse_id_set(text);
        std::set<size_t> in_sample;
        for (const auto& tok : tokens) {
            for (size_t i = 0; i < tree.parents.size(); ++i) {
                if (tree.parents[i].id == tok || tree.parents[i].summary == tok) {
                    in_sample.insert(i);
                    break;
                }
            }
        }
        for (size_t i : in_sample) ++votes[i];
    }

    std::vector<size_t> order;
    for (size_t i = 0; i < tree.parents.size(); ++i)
        if (votes[i] >= cfg.vote_keep) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return votes[a] > votes[b]; });

    std::vector<ParentNode> out;
    out.reserve(order.size());
    for (size_t i : order) out.push_back(tree.parents[i]);
    return out;
}

AspectSet generate_aspects(const std::string& step, const ParentNode& parent,
                           const PipelineConfig& cfg, CompletionBackend& completer) {
    CompletionRequest req;
    req.model = cfg.backend.completion_model;
    req.prompt = render_aspect_prompt(step, parent);
    req.temperature = cfg.temp_aspect;
    req.n_samples = 1;
    req.max_output_tokens = cfg.max_output_tokens;
    const auto resp = completer.complete(req);

    const auto items = parse_bullet_list(resp.texts.at(0));
    if (!items)
        throw MalformedResponse("aspect response for parent " + parent.id +
                                " is neither a list nor NONE");
    return AspectSet{parent.id, *items};
}

std::vector<Criterion> match_children(const AspectSet& aspects, const ParentNode& parent,
                                      double zeta, const PipelineConfig& cfg,
                                      EmbeddingBackend& embedder) {
    if (aspects.parent_id != parent.id)
        throw InvalidArgument("match_children: aspect set belongs to " + aspects.parent_id +
                              ", not " + parent.id);
    if (aspects.aspects.empty()) return {};

    const auto aspect_vecs =
        embed_checked(embedder, aspects.aspects, cfg.backend.embedding_model);

    std::vector<Criterion> out;
    for (const auto& child : parent.children) {
        if (!child.embedding)
            throw InvalidArgument("match_children: child " + child.id + " not embedded");
        for (const auto& av : aspect_vecs) {
            if (cosine_distance(av, *child.embedding) <= zeta) {
                out.push_back(child);
                break;
            }
        }
    }
    return out;
}

CriterionScore score_criterion(const std::string& criterion_id,
                               const std::string& criterion_text, ScoreKind kind,
                               const std::string& step, const StepContext& ctx,
                               const PipelineConfig& cfg, CompletionBackend& completer) {
    if (step.empty()) throw InvalidArgument("score_criterion: empty step");

    CompletionRequest req;
    req.model = cfg.backend.completion_model;
    req.prompt = render_scorer_prompt(criterion_text, kind, step, ctx);
    req.temperature = cfg.temp_scorer;
    req.n_samples = 1;
    req.max_output_tokens = cfg.max_output_tokens;
    const auto resp = completer.complete(req);

    const auto [score, rationale] =
        parse_score(resp.texts.at(0), cfg.score_min, cfg.score_max);
    return CriterionScore{criterion_id, kind, score, rationale};
}

ScoredStep allocate_step(const std::string& step_text, const std::string& trajectory_id,
                         int step_index, const std::string& candidate_id,
                         const RewardTree& tree, const StepContext& ctx,
                         const PipelineConfig& cfg, AllocationBackends backends) {
    ScoredStep out;
    out.trajectory_id = trajectory_id;
    out.step_index = step_index;
    out.candidate_id = candidate_id;

    std::set<std::string> scored_ids;
    auto add_score = [&](CriterionScore&& s) {
        if (scored_ids.insert(s.criterion_id).second) out.scores.push_back(std::move(s));
    };

    const auto parents = select_parents(step_text, tree, ctx, cfg, backends.completer);
    for (const auto& parent : parents) {
        const auto aspects = generate_aspects(step_text, parent, cfg, backends.completer);
        std::vector<Criterion> selected;
        if (!aspects.aspects.empty())
            selected = match_children(aspects, parent, cfg.zeta, cfg, backends.embedder);

        if (selected.empty()) {
            // Coarse-only evaluation: either the analysis asked for none,
            // or no child fell within zeta of any aspect.
            add_score(score_criterion(kCoarsePrefix + parent.id, parent.summary,
                                      ScoreKind::Coarse, step_text, ctx, cfg,
                                      backends.completer));
        } else {
            for (const auto& child : selected)
                add_score(score_criterion(child.id, child.text, ScoreKind::Fine, step_text,
                                          ctx, cfg, backends.completer));
        }
    }
    return out;
}

std::map<std::string, std::pair<std::string, ScoreKind>> criterion_texts(const RewardTree& tree) {
    std::map<std::string, std::pair<std::string, ScoreKind>> out;
    for (const auto& p : tree.parents) {
        out[kCoarsePrefix + p.id] = {p.summary, ScoreKind::Coarse};
        for (const auto& c : p.children) out[c.id] = {c.text, ScoreKind::Fine};
    }
    return out;
}

size_t designated_candidate_index(const std::vector<ScoredStep>& scored,
                                  const PipelineConfig& cfg) {
    if (scored.empty()) throw InvalidArgument("designated_candidate_index: no candidates");
    if (cfg.history_policy == "first" || scored.size() == 1) return 0;

    // Pareto policy: the front member with the highest criterion sum,
    // ties by candidate order. Score vectors share the same criterion set
    // after the union top-up.
    std::vector<std::string> criterion_ids;
    for (const auto& s : scored.front().scores) criterion_ids.push_back(s.criterion_id);
    if (criterion_ids.empty()) return 0;

    ScoreMatrix m;
    m.criterion_ids = criterion_ids;
    for (const auto& s : scored) {
        m.candidate_ids.push_back(s.candidate_id);
        std::map<std::string, int> by_id;
        for (const auto& cs : s.scores) by_id[cs.criterion_id] = cs.score;
        std::vector<int> row;
        for (const auto& id : criterion_ids) row.push_back(by_id.at(id));
        m.values.push_back(std::move(row));
    }
    const auto front = pareto_front(m);
    const std::set<std::string> front_set(front.begin(), front.end());

    size_t best = 0;
    long best_sum = -1;
    for (size_t i = 0; i < scored.size(); ++i) {
        if (!front_set.count(scored[i].candidate_id)) continue;
        long sum = 0;
        for (const auto& cs : scored[i].scores) sum += cs.score;
        if (sum > best_sum) {
            best_sum = sum;
            best = i;
        }
    }
    return best;
}

std::vector<ScoredStep> allocate_trajectory(const Trajectory& traj, const RewardTree& tree,
                                            const PipelineConfig& cfg,
                                            AllocationBackends backends) {
    if (traj.steps.empty()) throw InvalidArgument("allocate_trajectory: no steps");
    if (!traj.step_candidates.empty() && traj.step_candidates.size() != traj.steps.size())
        throw InvalidArgument("allocate_trajectory: step_candidates must cover every step");

    const auto texts = criterion_texts(tree);
    std::vector<StepRecord> history;
    std::vector<ScoredStep> all;

    const int n = static_cast<int>(traj.steps.size());
    for (int t = 1; t <= n; ++t) {
        const StepContext ctx = build_context(history, t, cfg.mu);

        std::vector<std::string> candidates;
        if (!traj.step_candidates.empty() &&
            !traj.step_candidates[static_cast<size_t>(t - 1)].empty()) {
            candidates = traj.step_candidates[static_cast<size_t>(t - 1)];
        } else {
            candidates = {traj.steps[static_cast<size_t>(t - 1)]};
        }

        std::vector<ScoredStep> at_step;
        for (size_t ci = 0; ci < candidates.size(); ++ci) {
            at_step.push_back(allocate_step(candidates[ci], traj.id, t,
                                            "c" + std::to_string(ci + 1), tree, ctx, cfg,
                                            backends));
        }

        // Top up to the union of selected criteria so every candidate at
        // this step carries a complete, commensurable score vector.
        std::vector<std::string> union_ids;
        std::set<std::string> seen;
        for (const auto& s : at_step)
            for (const auto& cs : s.scores)
                if (seen.insert(cs.criterion_id).second) union_ids.push_back(cs.criterion_id);

        for (size_t ci = 0; ci < at_step.size(); ++ci) {
            std::set<std::string> have;
            for (const auto& cs : at_step[ci].scores) have.insert(cs.criterion_id);
            for (const auto& id : union_ids) {
                if (have.count(id)) continue;
                const auto it = texts.find(id);
                if (it == texts.end())
                    throw InvalidArgument("scored criterion " + id + " is not in the tree");
                at_step[ci].scores.push_back(score_criterion(id, it->second.first,
                                                             it->second.second,
                                                             candidates[ci], ctx, cfg,
                                                             backends.completer));
            }
        }

        const size_t designated = designated_candidate_index(at_step, cfg);
        history.push_back({t, candidates[designated], at_step[designated].scores});
        for (auto& s : at_step) all.push_back(std::move(s));
    }
    return all;
}

} // namespace dgprm
