#include "commands.hpp"

#include <dgprm/allocation.hpp>
#include <dgprm/cache.hpp>
#include <dgprm/dpo.hpp>
#include <dgprm/errors.hpp>
#include <dgprm/extraction.hpp>
#include <dgprm/http_backend.hpp>
#include <dgprm/jsonl.hpp>
#include <dgprm/manifest.hpp>
#include <dgprm/metrics.hpp>
#include <dgprm/mock_backend.hpp>
#include <dgprm/parallel.hpp>
#include <dgprm/pareto.hpp>
#include <dgprm/reward_tree.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace dgprm::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

int guard(const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_backend_error(e) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

json config_to_json(const PipelineConfig& cfg) {
    json keep = json::array();
    for (const auto& v : cfg.keep_verdicts) keep.push_back(to_string(v));
    return json{
        {"xi", cfg.xi},
        {"zeta", cfg.zeta},
        {"mu", cfg.mu},
        {"vote_samples", cfg.vote_samples},
        {"vote_keep", cfg.vote_keep},
        {"beta", cfg.beta},
        {"score_min", cfg.score_min},
        {"score_max", cfg.score_max},
        {"xi_cluster", cfg.xi_cluster},
        {"branching_factor", cfg.branching_factor},
        {"dim", cfg.dim},
        {"temperatures",
         {{"judge", cfg.temp_judge},
          {"validator", cfg.temp_validator},
          {"selector", cfg.temp_selector},
          {"aspect", cfg.temp_aspect},
          {"scorer", cfg.temp_scorer},
          {"summarizer", cfg.temp_summarizer}}},
        {"max_output_tokens", cfg.max_output_tokens},
        {"keep_verdicts", keep},
        {"history_policy", cfg.history_policy},
        {"error_threshold", cfg.error_threshold},
        {"max_pairs_per_step", cfg.max_pairs_per_step},
        {"backend",
         {{"endpoint", cfg.backend.endpoint},
          {"completion_model", cfg.backend.completion_model},
          {"embedding_model", cfg.backend.embedding_model},
          {"cache_dir", cfg.backend.cache_dir},
          {"max_inflight", cfg.backend.max_inflight},
          {"mock_script", cfg.backend.mock_script},
          {"mock_seed", cfg.backend.mock_seed},
          {"retry",
           {{"max_attempts", cfg.backend.retry.max_attempts},
            {"backoff_ms", cfg.backend.retry.backoff_ms}}}}},
    };
}

struct Backends {
    std::shared_ptr<CompletionBackend> completer;
    std::shared_ptr<EmbeddingBackend> embedder;
    std::shared_ptr<UsageTally> tally;
};

Backends make_backends(const PipelineConfig& cfg) {
    Backends b;
    if (!cfg.backend.mock_script.empty()) {
        b.completer = std::make_shared<MockCompletionBackend>(
            MockCompletionBackend::from_script(cfg.backend.mock_script));
        b.embedder = std::make_shared<MockEmbeddingBackend>(cfg.dim, cfg.backend.mock_seed);
    } else {
        b.completer = std::make_shared<HttpCompletionBackend>(cfg.backend);
        b.embedder = std::make_shared<HttpEmbeddingBackend>(cfg.backend, cfg.dim);
    }
    if (!cfg.backend.cache_dir.empty()) {
        auto cache = std::make_shared<DiskCache>(cfg.backend.cache_dir);
        b.completer = std::make_shared<CachedCompletionBackend>(b.completer, cache);
        b.embedder = std::make_shared<CachedEmbeddingBackend>(b.embedder, cache);
    }
    b.tally = std::make_shared<UsageTally>();
    b.completer = std::make_shared<MeteredCompletionBackend>(b.completer, b.tally);
    return b;
}

std::string manifest_path_for(const std::string& out_path, const GlobalOptions& g) {
    if (!g.manifest_path.empty()) return g.manifest_path;
    auto dir = std::filesystem::path(out_path).parent_path();
    if (dir.empty()) dir = ".";
    return (dir / "dgprm-run.json").string();
}

std::string params_digest(const PipelineConfig& cfg, const std::string& stage,
                          const json& extra) {
    json j = {{"stage", stage}, {"config", config_to_json(cfg)}, {"args", extra}};
    return sha256_hex(j.dump());
}

/// Returns true when the stage can be skipped. Prints the skip notice.
bool stage_current(RunManifest& manifest, const std::string& stage,
                   const std::vector<std::string>& inputs, const std::string& digest) {
    if (manifest.stage_is_current(stage, inputs, digest)) {
        std::cout << "[skip] " << stage << ": inputs and outputs unchanged\n";
        return true;
    }
    return false;
}

void finish_stage(RunManifest& manifest, const std::string& stage,
                  const std::vector<std::string>& inputs,
                  const std::vector<std::string>& outputs, const std::string& digest,
                  const TokenUsage& usage) {
    manifest.record_stage(stage, inputs, outputs, digest, usage);
    manifest.save();
}

/// Candidate texts for one step of a trajectory (1-based t).
std::vector<std::string> candidates_at(const Trajectory& traj, int t) {
    const auto idx = static_cast<size_t>(t - 1);
    if (!traj.step_candidates.empty() && !traj.step_candidates[idx].empty())
        return traj.step_candidates[idx];
    return {traj.steps[idx]};
}

size_t candidate_index(const std::string& candidate_id) {
    if (candidate_id.size() < 2 || candidate_id[0] != 'c')
        throw InvalidArgument("candidate id \"" + candidate_id + "\" is not cN-formed");
    return static_cast<size_t>(std::stoul(candidate_id.substr(1))) - 1;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

PipelineConfig effective_config(const GlobalOptions& g) {
    PipelineConfig cfg = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
    if (!g.cache_dir.empty()) cfg.backend.cache_dir = g.cache_dir;
    if (!g.mock_script.empty()) cfg.backend.mock_script = g.mock_script;
    if (g.seed) cfg.backend.mock_seed = *g.seed;
    if (g.max_inflight) cfg.backend.max_inflight = *g.max_inflight;
    return validate_config(cfg);
}

int cmd_extract(const std::string& pairs_path, const std::string& out_path,
                const GlobalOptions& g) {
    return guard([&] {
        const auto cfg = effective_config(g);
        auto manifest = RunManifest::load_or_create(manifest_path_for(out_path, g));
        const auto digest = params_digest(cfg, "extract", {{"out", out_path}});
        if (stage_current(manifest, "extract", {pairs_path}, digest)) return 0;

        const auto pairs = read_comparison_pairs(pairs_path);
        if (pairs.empty()) {
            std::cerr << "error: no comparison pairs in " << pairs_path << "\n";
            return 1;
        }
        auto backends = make_backends(cfg);
        const auto criteria = extract_all(pairs, *backends.completer, cfg);
        write_criteria(out_path, criteria);
        finish_stage(manifest, "extract", {pairs_path}, {out_path}, digest,
                     backends.tally->total());
        std::cout << "extracted " << criteria.size() << " criteria from " << pairs.size()
                  << " pairs -> " << out_path << "\n";
        return 0;
    });
}

int cmd_validate(const std::string& criteria_path, const std::string& out_path,
                 const GlobalOptions& g) {
    return guard([&] {
        const auto cfg = effective_config(g);
        auto manifest = RunManifest::load_or_create(manifest_path_for(out_path, g));
        const auto digest = params_digest(cfg, "validate", {{"out", out_path}});
        if (stage_current(manifest, "validate", {criteria_path}, digest)) return 0;

        const auto criteria = read_criteria(criteria_path);
        if (criteria.empty()) {
            std::cerr << "error: no criteria in " << criteria_path << "\n";
            return 1;
        }
        auto backends = make_backends(cfg);
        const auto validated = validate_all(criteria, *backends.completer, cfg);
        write_criteria(out_path, validated);

        std::map<std::string, int> counts;
        for (const auto& c : validated) ++counts[to_string(c.verdict)];
        finish_stage(manifest, "validate", {criteria_path}, {out_path}, digest,
                     backends.tally->total());
        std::cout << "validated " << validated.size() << " criteria (";
        bool first = true;
        for (const auto& [label, n] : counts) {
            if (!first) std::cout << ", ";
            std::cout << label << "=" << n;
            first = false;
        }
        std::cout << ") -> " << out_path << "\n";
        return 0;
    });
}

int cmd_build_tree(const std::string& criteria_path, const std::string& out_path,
                   std::optional<double> xi, std::optional<double> xi_cluster,
                   const GlobalOptions& g) {
    return guard([&] {
        auto cfg = effective_config(g);
        if (xi) cfg.xi = *xi;
        if (xi_cluster) cfg.xi_cluster = *xi_cluster;
        cfg = validate_config(cfg);

        auto manifest = RunManifest::load_or_create(manifest_path_for(out_path, g));
        const auto digest = params_digest(cfg, "build-tree", {{"out", out_path}});
        if (stage_current(manifest, "build-tree", {criteria_path}, digest)) return 0;

        const auto criteria = read_criteria(criteria_path);
        if (criteria.empty()) {
            std::cerr << "error: no criteria in " << criteria_path << "\n";
            return 1;
        }
        const auto kept = filter_criteria(criteria, cfg.keep_verdicts);
        if (kept.empty()) {
            std::cerr << "error: no criteria kept after verdict filtering\n";
            return 1;
        }

        auto backends = make_backends(cfg);
        const auto built = build_tree(kept, cfg, *backends.embedder, *backends.completer);
        save_tree(built.tree, out_path);

        size_t children = 0;
        for (const auto& p : built.tree.parents) children += p.children.size();
        finish_stage(manifest, "build-tree", {criteria_path}, {out_path}, digest,
                     backends.tally->total());
        std::cout << "built tree: " << built.tree.parents.size() << " parents, " << children
                  << " children, " << built.merges.size() << " merges -> " << out_path
                  << "\n";
        return 0;
    });
}

int cmd_allocate(const std::string& tree_path, const std::string& traj_path,
                 const std::string& out_path, const GlobalOptions& g) {
    return guard([&] {
        const auto cfg = effective_config(g);
        auto manifest = RunManifest::load_or_create(manifest_path_for(out_path, g));
        const auto digest = params_digest(cfg, "allocate", {{"out", out_path}});
        if (stage_current(manifest, "allocate", {tree_path, traj_path}, digest)) return 0;

        const auto tree = load_tree(tree_path);
        const auto trajectories = read_trajectories(traj_path);
        if (trajectories.empty()) {
            std::cerr << "error: no trajectories in " << traj_path << "\n";
            return 1;
        }

        auto backends = make_backends(cfg);
        AllocationBackends ab{*backends.completer, *backends.embedder};
        const auto per_traj = parallel_map<std::vector<ScoredStep>>(
            trajectories.size(), cfg.backend.max_inflight,
            [&](size_t i) { return allocate_trajectory(trajectories[i], tree, cfg, ab); });

        std::vector<ScoredStep> all;
        for (const auto& batch : per_traj)
            for (const auto& s : batch) all.push_back(s);
        write_scored_steps(out_path, all);
        finish_stage(manifest, "allocate", {tree_path, traj_path}, {out_path}, digest,
                     backends.tally->total());
        std::cout << "scored " << all.size() << " (step, candidate) records across "
                  << trajectories.size() << " trajectories -> " << out_path << "\n";
        return 0;
    });
}

int cmd_pairs(const std::string& scored_path, const std::string& traj_path,
              const std::string& out_path, const std::string& strategy,
              std::optional<int> pairs_per_step, const GlobalOptions& g) {
    return guard([&] {
        const auto cfg = effective_config(g);
        if (strategy != "pareto" && strategy != "random") {
            std::cerr << "error: --strategy must be pareto or random\n";
            return 1;
        }
        if (strategy == "random" && !g.seed) {
            std::cerr << "error: --strategy random requires an explicit --seed\n";
            return 1;
        }

        auto manifest = RunManifest::load_or_create(manifest_path_for(out_path, g));
        const auto digest = params_digest(
            cfg, "pairs",
            {{"out", out_path},
             {"strategy", strategy},
             {"seed", g.seed ? json(*g.seed) : json()},
             {"pairs_per_step", pairs_per_step ? json(*pairs_per_step) : json()}});
        if (stage_current(manifest, "pairs", {scored_path, traj_path}, digest)) return 0;

        const auto scored = read_scored_steps(scored_path);
        const auto trajectories = read_trajectories(traj_path);
        std::map<std::string, const Trajectory*> traj_by_id;
        for (const auto& t : trajectories) traj_by_id[t.id] = &t;

        // Group scored candidates by (trajectory, step), preserving file
        // order within a group and the trajectories' own ordering overall.
        std::map<std::pair<std::string, int>, std::vector<const ScoredStep*>> groups;
        for (const auto& s : scored) groups[{s.trajectory_id, s.step_index}].push_back(&s);

        std::vector<PreferencePair> all_pairs;
        for (const auto& traj : trajectories) {
            const int n_steps = static_cast<int>(traj.steps.size());
            std::vector<std::string> history; // designated texts, steps 1..t-1
            for (int t = 1; t <= n_steps; ++t) {
                const auto it = groups.find({traj.id, t});
                if (it == groups.end())
                    throw AlignmentError("no scored records for trajectory " + traj.id +
                                         " step " + std::to_string(t));
                const auto& group = it->second;
                const auto texts = candidates_at(traj, t);
                if (texts.size() != group.size())
                    throw AlignmentError("trajectory " + traj.id + " step " +
                                         std::to_string(t) + ": " +
                                         std::to_string(group.size()) +
                                         " scored candidates vs " +
                                         std::to_string(texts.size()) + " texts");

                std::string prompt = traj.input;
                for (const auto& h : history) prompt += "\n" + h;

                std::vector<ScoredStep> group_vals;
                group_vals.reserve(group.size());
                for (const auto* s : group) group_vals.push_back(*s);
                const size_t designated = designated_candidate_index(group_vals, cfg);
                history.push_back(texts[candidate_index(group_vals[designated].candidate_id)]);

                if (group.size() < 2) continue;

                // Matrix rows follow the group's candidate order; columns
                // follow the first candidate's criterion order.
                ScoreMatrix m;
                for (const auto& cs : group_vals.front().scores)
                    m.criterion_ids.push_back(cs.criterion_id);
                if (m.criterion_ids.empty()) continue;
                PairContext pctx;
                pctx.trajectory_id = traj.id;
                pctx.step_index = t;
                pctx.prompt = prompt;
                for (const auto& s : group_vals) {
                    m.candidate_ids.push_back(s.candidate_id);
                    pctx.candidate_texts.push_back(texts[candidate_index(s.candidate_id)]);
                    std::map<std::string, int> by_id;
                    for (const auto& cs : s.scores) by_id[cs.criterion_id] = cs.score;
                    std::vector<int> row;
                    for (const auto& id : m.criterion_ids) {
                        const auto f = by_id.find(id);
                        if (f == by_id.end())
                            throw AlignmentError("candidate " + s.candidate_id +
                                                 " is missing a score for " + id +
                                                 " (incommensurable matrix)");
                        row.push_back(f->second);
                    }
                    m.values.push_back(std::move(row));
                }

                const auto pareto = build_pairs_pareto(m, pctx, cfg.max_pairs_per_step);
                if (strategy == "pareto") {
                    for (const auto& p : pareto) all_pairs.push_back(p);
                } else {
                    const int target =
                        pairs_per_step ? *pairs_per_step : static_cast<int>(pareto.size());
                    if (target == 0) continue;
                    const std::uint64_t step_seed =
                        *g.seed ^ fnv1a64(traj.id + ":" + std::to_string(t));
                    for (const auto& p : build_pairs_random(m, pctx, target, step_seed))
                        all_pairs.push_back(p);
                }
            }
        }

        write_preference_pairs(out_path, all_pairs);
        finish_stage(manifest, "pairs", {scored_path, traj_path}, {out_path}, digest, {});
        std::cout << "built " << all_pairs.size() << " " << strategy << " pairs -> "
                  << out_path << "\n";
        return 0;
    });
}

int cmd_loss(const std::string& logprobs_path, std::optional<double> beta, bool per_record,
             const GlobalOptions& g) {
    return guard([&] {
        const auto cfg = effective_config(g);
        const double b = beta.value_or(cfg.beta);
        const auto recs = read_logprob_records(logprobs_path);
        if (recs.empty()) {
            std::cerr << "error: no log-prob records in " << logprobs_path << "\n";
            return 1;
        }
        if (per_record) {
            for (size_t i = 0; i < recs.size(); ++i) {
                const double d = delta(recs[i]);
                const double l = dpo_loss({recs[i]}, b);
                std::cout << i + 1 << "\tdelta=" << std::setprecision(12) << d
                          << "\tloss=" << l << "\n";
            }
        }
        ordered_json out = {
            {"beta", b},
            {"count", recs.size()},
            {"mean_loss", dpo_loss(recs, b)},
        };
        std::cout << out.dump(2) << "\n";
        return 0;
    });
}

namespace {

void print_report_row(const std::string& name, const MetricReport& r) {
    std::cout << std::left << std::setw(14) << name << std::right << std::fixed
              << std::setprecision(4) << std::setw(10) << r.f1_error << std::setw(12)
              << r.f1_correct << std::setw(11) << r.prm_score << std::setw(7) << r.counts.tp
              << std::setw(7) << r.counts.fp << std::setw(7) << r.counts.fn << std::setw(7)
              << r.counts.tn << "\n";
}

json report_to_json(const MetricReport& r) {
    json j = {
        {"f1_error", r.f1_error},
        {"f1_correct", r.f1_correct},
        {"prm_score", r.prm_score},
        {"counts",
         {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}}},
    };
    if (!r.per_category.empty()) {
        json cats = json::object();
        for (const auto& [name, sub] : r.per_category) cats[name] = report_to_json(sub);
        j["per_category"] = std::move(cats);
    }
    return j;
}

} // namespace

int cmd_eval(const std::string& gold_path, const std::string& pred_path,
             const std::string& scored_path, std::optional<int> threshold, bool macro,
             const std::string& out_path, const GlobalOptions& g) {
    return guard([&] {
        const auto cfg = effective_config(g);
        if (pred_path.empty() == scored_path.empty()) {
            std::cerr << "error: provide exactly one of --pred or --scored\n";
            return 1;
        }
        const auto gold = read_step_verdicts(gold_path);

        std::vector<StepVerdicts> pred;
        if (!pred_path.empty()) {
            pred = read_step_verdicts(pred_path);
        } else {
            const int thr = threshold.value_or(cfg.error_threshold);
            const auto scored = read_scored_steps(scored_path);
            std::map<std::string, std::vector<ScoredStep>> by_traj;
            std::vector<std::string> order;
            for (const auto& s : scored) {
                if (!by_traj.count(s.trajectory_id)) order.push_back(s.trajectory_id);
                by_traj[s.trajectory_id].push_back(s);
            }
            for (const auto& id : order)
                pred.push_back(verdicts_from_scores(id, by_traj[id], thr));
        }

        const auto report = prm_score(pred, gold, macro);
        std::cout << std::left << std::setw(14) << "" << std::right << std::setw(10)
                  << "f1_error" << std::setw(12) << "f1_correct" << std::setw(11)
                  << "prm_score" << std::setw(7) << "tp" << std::setw(7) << "fp"
                  << std::setw(7) << "fn" << std::setw(7) << "tn" << "\n";
        print_report_row("overall", report);
        for (const auto& [name, sub] : report.per_category) print_report_row(name, sub);

        if (!out_path.empty()) {
            std::ofstream out(out_path, std::ios::trunc);
            if (!out) throw IoError("cannot write report: " + out_path);
            out << report_to_json(report).dump(2) << "\n";
        } else {
            std::cout << report_to_json(report).dump(2) << "\n";
        }
        return 0;
    });
}

int cmd_stats(const std::string& scored_path, const std::string& pairs_path,
              const std::string& out_path, const GlobalOptions& g) {
    return guard([&] {
        (void)effective_config(g);
        const auto scored = read_scored_steps(scored_path);
        std::vector<PreferencePair> pairs;
        if (!pairs_path.empty()) pairs = read_preference_pairs(pairs_path);

        const auto st = run_stats(scored, pairs);
        ordered_json j = {
            {"scored_steps", st.scored_steps},
            {"avg_coarse_per_step", st.avg_coarse_per_step},
            {"avg_fine_per_step", st.avg_fine_per_step},
            {"selection_ratio", st.selection_ratio},
            {"pair_counts", st.pair_counts},
        };
        std::cout << j.dump(2) << "\n";
        if (!out_path.empty()) {
            std::ofstream out(out_path, std::ios::trunc);
            if (!out) throw IoError("cannot write stats: " + out_path);
            out << j.dump(2) << "\n";
        }
        return 0;
    });
}

} // namespace dgprm::cli
