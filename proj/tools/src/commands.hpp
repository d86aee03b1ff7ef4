#pragma once

/**
 * Subcommand implementations behind the dgprm binary. Split from main so
 * the test suites can drive them in-process.
 *
 * Exit codes: 0 success, 1 input/usage error, 2 backend error.
 */

#include <dgprm/config.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace dgprm::cli {

struct GlobalOptions {
    std::string config_path;
    std::string cache_dir;    // overrides config
    std::string mock_script;  // non-empty selects offline mock backends
    std::optional<std::uint64_t> seed;
    std::optional<int> max_inflight;
    std::string manifest_path; // default: dgprm-run.json next to the output
};

/// Effective config: file (when given) + overrides from the globals.
PipelineConfig effective_config(const GlobalOptions& g);

int cmd_extract(const std::string& pairs_path, const std::string& out_path,
                const GlobalOptions& g);

int cmd_validate(const std::string& criteria_path, const std::string& out_path,
                 const GlobalOptions& g);

int cmd_build_tree(const std::string& criteria_path, const std::string& out_path,
                   std::optional<double> xi, std::optional<double> xi_cluster,
                   const GlobalOptions& g);

int cmd_allocate(const std::string& tree_path, const std::string& traj_path,
                 const std::string& out_path, const GlobalOptions& g);

int cmd_pairs(const std::string& scored_path, const std::string& traj_path,
              const std::string& out_path, const std::string& strategy,
              std::optional<int> pairs_per_step, const GlobalOptions& g);

int cmd_loss(const std::string& logprobs_path, std::optional<double> beta,
             bool per_record, const GlobalOptions& g);

int cmd_eval(const std::string& gold_path, const std::string& pred_path,
             const std::string& scored_path, std::optional<int> threshold, bool macro,
             const std::string& out_path, const GlobalOptions& g);

int cmd_stats(const std::string& scored_path, const std::string& pairs_path,
              const std::string& out_path, const GlobalOptions& g);

} // namespace dgprm::cli
