#pragma once

/**
 * Dynamic per-step reward allocation.
 *
 * For each step: assemble the context window over the preceding steps,
 * select coarse parents from the reward tree by sampled vote, generate
 * fine-grained evaluation aspects per parent, match children within the
 * cosine threshold zeta, and score every selected criterion on the
 * configured integer scale. A parent whose aspects come back empty (or
 * match no child) is scored directly as a coarse criterion.
 */

#include "dgprm/backend.hpp"
#include "dgprm/config.hpp"
#include "dgprm/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace dgprm {

struct ContextEntry {
    int step_index = 0;
    std::string step_text;
    std::vector<CriterionScore> scores;
};

/// Window over steps [max(1, t-mu), t-1], ordered by step index.
struct StepContext {
    std::vector<ContextEntry> entries;
};

/// One history record per completed step (the designated candidate's
/// text and scores).
struct StepRecord {
    int step_index = 0;
    std::string step_text;
    std::vector<CriterionScore> scores;
};

/// Coarse scores use the parent id behind this prefix, keeping the
/// one-score-per-criterion invariant when a parent summary is scored
/// alongside its children.
inline constexpr const char* kCoarsePrefix = "coarse:";

/// Builds the window for step t from history covering steps 1..t-1.
/// Throws HistoryGap when a required step is missing.
StepContext build_context(const std::vector<StepRecord>& history, int t, int mu);

/// Samples vote_samples selector completions; parents named by exact id
/// or exact summary match in >= vote_keep samples are returned, ordered
/// by vote count descending with ties in tree order.
std::vector<ParentNode> select_parents(const std::string& step, const RewardTree& tree,
                                       const StepContext& ctx, const PipelineConfig& cfg,
                                       CompletionBackend& completer);

struct AspectSet {
    std::string parent_id;
    std::vector<std::string> aspects; // pairwise distinct; empty = coarse only
};

AspectSet generate_aspects(const std::string& step, const ParentNode& parent,
                           const PipelineConfig& cfg, CompletionBackend& completer);

/// Children whose cosine distance to any aspect embedding is <= zeta,
/// de-duplicated, tree order preserved. Empty aspects select nothing.
std::vector<Criterion> match_children(const AspectSet& aspects, const ParentNode& parent,
                                      double zeta, const PipelineConfig& cfg,
                                      EmbeddingBackend& embedder);

CriterionScore score_criterion(const std::string& criterion_id,
                               const std::string& criterion_text, ScoreKind kind,
                               const std::string& step, const StepContext& ctx,
                               const PipelineConfig& cfg, CompletionBackend& completer);

struct AllocationBackends {
    CompletionBackend& completer;
    EmbeddingBackend& embedder;
};

/// Runs the full per-step pipeline for one candidate. A step where no
/// parent wins the vote yields an empty score list.
ScoredStep allocate_step(const std::string& step_text, const std::string& trajectory_id,
                         int step_index, const std::string& candidate_id,
                         const RewardTree& tree, const StepContext& ctx,
                         const PipelineConfig& cfg, AllocationBackends backends);

/// Scores every candidate of every step. All candidates at one step are
/// topped up to the union of the criteria selected for any of them, so
/// their score vectors are commensurable. The context threads forward
/// through the designated history candidate (cfg.history_policy).
std::vector<ScoredStep> allocate_trajectory(const Trajectory& traj, const RewardTree& tree,
                                            const PipelineConfig& cfg,
                                            AllocationBackends backends);

/// Lookup from score ids back to criterion texts: children by id, parent
/// summaries behind kCoarsePrefix.
std::map<std::string, std::pair<std::string, ScoreKind>> criterion_texts(const RewardTree& tree);

/// Index of the candidate whose step threads into the history: 0 under
/// "first", the front member with the highest criterion sum under
/// "pareto" (ties by candidate order).
size_t designated_candidate_index(const std::vector<ScoredStep>& at_step,
                                  const PipelineConfig& cfg);

} // namespace dgprm
