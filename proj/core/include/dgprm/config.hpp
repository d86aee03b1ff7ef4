#pragma once

#include "dgprm/types.hpp"

#include <cstdint>
#include <set>
#include <string>

namespace dgprm {

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 250; // doubled per attempt
};

struct BackendSettings {
    std::string endpoint;             // base URL; DGPRM_API_BASE overrides
    std::string completion_model = "gpt-4o";
    std::string embedding_model = "bge-en-icl";
    std::string cache_dir;            // empty disables the disk cache
    int max_inflight = 4;
    RetryPolicy retry;
    // Mock mode: script path for the completion backend, RNG seed for the
    // embedding backend.
    std::string mock_script;
    std::uint64_t mock_seed = 0;
};

struct PipelineConfig {
    double xi = 0.25;        // merge threshold, cosine distance
    double zeta = 0.2;       // aspect-to-child match threshold
    int mu = 20;             // context window, steps
    int vote_samples = 5;
    int vote_keep = 3;       // parent kept when votes >= vote_keep
    double beta = 0.1;       // preference-loss temperature
    int score_min = 1;
    int score_max = 10;

    double xi_cluster = 0.5; // cluster radius, cosine-distance units
    int branching_factor = 50;
    int dim = 4096;

    // Sampling temperatures per prompt role. Votes and aspect generation
    // need diversity; everything else is deterministic.
    double temp_judge = 0.0;
    double temp_validator = 0.0;
    double temp_selector = 0.7;
    double temp_aspect = 0.7;
    double temp_scorer = 0.0;
    double temp_summarizer = 0.0;
    int max_output_tokens = 1024;

    // Verdict labels retained by the validator filter.
    std::set<Verdict> keep_verdicts = {Verdict::Good, Verdict::Ordinary};

    // Which candidate's scored step threads into the context window:
    // "first" = first listed, "pareto" = front member with highest total.
    std::string history_policy = "first";

    int error_threshold = 5;       // min score <= threshold => erroneous step
    int max_pairs_per_step = 0;    // 0 = unlimited

    BackendSettings backend;
};

/// Returns cfg unchanged when every invariant holds; otherwise throws
/// ConfigError naming the first violated field in declaration order.
PipelineConfig validate_config(const PipelineConfig& cfg);

/// Reads a JSON config file; unknown keys are rejected. Missing keys keep
/// their defaults. The result is validated.
PipelineConfig load_config(const std::string& path);

} // namespace dgprm
