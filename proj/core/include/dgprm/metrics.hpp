#pragma once

#include "dgprm/types.hpp"

#include <vector>

namespace dgprm {

/// Maps a scored step to a binary error flag: erroneous iff the minimum
/// criterion score is <= threshold. Steps with no scores are not flagged.
bool step_is_erroneous(const ScoredStep& ss, int threshold);

/// Derives per-step verdicts for one trajectory from its scored steps
/// (single-candidate runs; steps must be 1..n with no gaps).
StepVerdicts verdicts_from_scores(const std::string& trajectory_id,
                                  const std::vector<ScoredStep>& steps, int threshold);

/// Pools steps across trajectories (default) or averages per-trajectory
/// reports when macro is set. f1_error treats erroneous as the positive
/// class, f1_correct treats correct as positive, and the headline score is
/// their mean. F1 with a zero denominator is 0. Predictions and gold must
/// align by trajectory id and step count.
MetricReport prm_score(const std::vector<StepVerdicts>& pred,
                       const std::vector<StepVerdicts>& gold, bool macro = false);

struct RunStats {
    double avg_coarse_per_step = 0.0;
    double avg_fine_per_step = 0.0;
    double selection_ratio = 0.0;
    std::map<std::string, std::int64_t> pair_counts; // strategy -> count
    std::int64_t scored_steps = 0;
};

/// Aggregate run statistics: average coarse/fine criteria per scored
/// step, candidate selection ratio, and pair counts per strategy.
RunStats run_stats(const std::vector<ScoredStep>& scored,
                   const std::vector<PreferencePair>& pairs);

} // namespace dgprm
