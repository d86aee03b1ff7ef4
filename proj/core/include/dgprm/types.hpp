#pragma once

/**
 * Domain types shared across the pipeline.
 *
 * Everything here is a plain value type, immutable by convention after
 * construction, and safe to copy across worker threads.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dgprm {

/// Dense embedding, one 64-bit float per dimension.
using EmbeddingVector = std::vector<double>;

enum class Verdict {
    Good,
    Ordinary,
    Bad,
    Unvalidated,
};

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

/// One textual reward criterion; leaf payload of the reward tree.
struct Criterion {
    std::string id;
    std::string text;
    std::optional<EmbeddingVector> embedding;
    std::vector<std::string> source_ids;
    Verdict verdict = Verdict::Unvalidated;
};

/// Coarse-grained node: a summary over a cluster of fine-grained criteria.
struct ParentNode {
    std::string id;
    std::string summary;
    EmbeddingVector centroid; // unit-normalized mean of child embeddings
    std::vector<Criterion> children;
};

inline constexpr const char* kTreeFormatVersion = "dgprm-tree/1";

/// Two-level reward structure: parents (coarse) over children (fine).
struct RewardTree {
    std::string version = kTreeFormatVersion;
    std::string embedding_model;
    int dim = 0;
    double xi = 0.0;         // merge threshold used during dedup
    double xi_cluster = 0.0; // cluster radius, cosine-distance units
    std::vector<ParentNode> parents;
};

/// Problem input plus an ordered step decomposition of one model output.
struct Trajectory {
    std::string id;
    std::string input;
    std::vector<std::string> steps;
    // Alternatives per step; when empty, `steps` is the single candidate.
    std::vector<std::vector<std::string>> step_candidates;
    std::vector<int> gold_error_steps; // 1-based, optional
};

enum class ScoreKind { Coarse, Fine };

std::string to_string(ScoreKind k);
ScoreKind score_kind_from_string(const std::string& s);

struct CriterionScore {
    std::string criterion_id;
    ScoreKind kind = ScoreKind::Fine;
    int score = 0; // integer in [score_min, score_max]
    std::string rationale;
};

/// Per-step scoring result for one candidate.
struct ScoredStep {
    std::string trajectory_id;
    int step_index = 0; // 1-based
    std::string candidate_id;
    std::vector<CriterionScore> scores; // at most one entry per criterion_id
};

/// Positive/negative step pair selected by dominance (or the random
/// baseline), ready for preference-optimization trainers.
struct PreferencePair {
    std::string trajectory_id;
    std::string prompt; // input followed by steps before step_index
    std::string chosen;
    std::string rejected;
    int step_index = 0;
    std::string chosen_id;
    std::string rejected_id;
    // criterion_id -> (chosen score - rejected score); empty for the
    // random baseline.
    std::vector<std::pair<std::string, int>> dominance_record;
    std::string strategy; // "pareto" | "random"
    std::uint64_t seed = 0;
};

struct ComparisonPair {
    std::string id;
    std::string input;
    std::string positive;
    std::string negative;
};

/// Candidates x criteria integer scores for one step; no missing cells.
struct ScoreMatrix {
    std::vector<std::string> candidate_ids;
    std::vector<std::string> criterion_ids;
    std::vector<std::vector<int>> values; // [candidate][criterion]
};

/// Log-probabilities of a chosen/rejected step under policy and reference.
struct LogProbRecord {
    double lp_theta_pos = 0.0;
    double lp_ref_pos = 0.0;
    double lp_theta_neg = 0.0;
    double lp_ref_neg = 0.0;
};

/// Per-step error flags for one trajectory (true = erroneous step).
struct StepVerdicts {
    std::string trajectory_id;
    std::vector<bool> labels;
    std::string category; // optional benchmark category tag
};

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;
};

struct MetricReport {
    double f1_error = 0.0;
    double f1_correct = 0.0;
    double prm_score = 0.0; // (f1_error + f1_correct) / 2
    ConfusionCounts counts; // error class as positive
    std::map<std::string, MetricReport> per_category;
};

} // namespace dgprm
