#pragma once

/**
 * Pareto dominance over per-criterion score vectors, front extraction,
 * preference-pair construction, and the random-pairing ablation baseline.
 */

#include "dgprm/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dgprm {

/// True iff a >= b componentwise with at least one strict inequality.
/// Throws LengthMismatch on unequal lengths or empty vectors.
bool dominates(const std::vector<int>& a, const std::vector<int>& b);

/// Throws on missing cells, empty axes, or ragged rows.
void check_matrix(const ScoreMatrix& m);

/// Candidate ids not dominated by any other row, in candidate order.
/// Duplicate rows of a front member are front members too.
std::vector<std::string> pareto_front(const ScoreMatrix& m);

struct PairContext {
    std::string trajectory_id;
    int step_index = 0;
    std::string prompt;
    std::vector<std::string> candidate_texts; // aligned with m.candidate_ids
};

/// All (front member, dominated candidate) pairs in front order x
/// candidate order, with per-criterion score deltas. When max_pairs > 0,
/// keeps the largest-total-delta pairs (ties by emission order).
std::vector<PreferencePair> build_pairs_pareto(const ScoreMatrix& m, const PairContext& ctx,
                                               int max_pairs = 0);

/// Ablation baseline: pairs the highest-scoring candidate (by criterion
/// sum, ties by id order) with target_count distinct others drawn by a
/// seeded generator. Throws InsufficientCandidates when target_count
/// exceeds n-1.
std::vector<PreferencePair> build_pairs_random(const ScoreMatrix& m, const PairContext& ctx,
                                               int target_count, std::uint64_t seed);

/// |distinct candidates appearing in any pair| / n_candidates.
double selection_ratio(const std::vector<PreferencePair>& pairs, int n_candidates);

} // namespace dgprm
