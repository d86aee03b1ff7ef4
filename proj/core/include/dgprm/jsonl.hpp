#pragma once

/**
 * Line-oriented JSON readers and writers for every pipeline file format.
 * Writers emit one compact object per line with a fixed key order so
 * reruns are byte-identical; readers report the offending line number.
 */

#include "dgprm/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace dgprm {

std::vector<nlohmann::json> read_jsonl(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

// {"id", "input", "positive", "negative"}
std::vector<ComparisonPair> read_comparison_pairs(const std::string& path);

// {"id", "text", "source_ids", "verdict"}
std::vector<Criterion> read_criteria(const std::string& path);
void write_criteria(const std::string& path, const std::vector<Criterion>& cs);

// {"id", "input", "steps": [...]} or {"id", "input", "raw": "..."} or
// {"id", "input", "step_candidates": [[...], ...]}; optional
// "gold_error_steps".
std::vector<Trajectory> read_trajectories(const std::string& path);

// {"trajectory_id", "step_index", "candidate_id",
//  "scores": [{"criterion_id", "kind", "score", "rationale"}, ...]}
std::vector<ScoredStep> read_scored_steps(const std::string& path);
void write_scored_steps(const std::string& path, const std::vector<ScoredStep>& steps);

// {"prompt", "chosen", "rejected", "step_index", "trajectory_id",
//  "meta": {"chosen_id", "rejected_id", "deltas", "strategy", "seed"}}
std::vector<PreferencePair> read_preference_pairs(const std::string& path);
void write_preference_pairs(const std::string& path,
                            const std::vector<PreferencePair>& pairs);

// {"lp_theta_pos", "lp_ref_pos", "lp_theta_neg", "lp_ref_neg"}
std::vector<LogProbRecord> read_logprob_records(const std::string& path);

// {"trajectory_id", "labels": [bool, ...]}; optional "category".
std::vector<StepVerdicts> read_step_verdicts(const std::string& path);
void write_step_verdicts(const std::string& path, const std::vector<StepVerdicts>& vs);

} // namespace dgprm
