#include "commands.hpp"

#include <CLI11.hpp>

#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"dgprm: mine process-reward criteria, build a reward tree, "
                 "allocate step-wise rewards, and emit preference-pair training data"};
    app.require_subcommand(1);

    dgprm::cli::GlobalOptions g;
    std::uint64_t seed_value = 0;
    bool seed_set = false;
    int max_inflight_value = 0;
    bool max_inflight_set = false;

    app.add_option("--config", g.config_path, "JSON pipeline config");
    app.add_option("--cache-dir", g.cache_dir, "Disk cache directory for backend responses");
    app.add_option("--mock", g.mock_script,
                   "Mock script JSON; selects deterministic offline backends");
    auto* seed_opt = app.add_option("--seed", seed_value,
                                    "Seed for mock embeddings and random pairing");
    auto* inflight_opt =
        app.add_option("--max-inflight", max_inflight_value, "Max concurrent backend requests")
            ->check(CLI::PositiveNumber);
    app.add_option("--manifest", g.manifest_path,
                   "Run manifest path (default: dgprm-run.json next to the output)");

    // extract
    std::string pairs_in, extract_out;
    auto* extract = app.add_subcommand("extract", "Mine criteria from comparison pairs");
    extract->add_option("--pairs", pairs_in, "Comparison pairs JSONL")->required();
    extract->add_option("--out", extract_out, "Criteria JSONL output")->required();

    // validate
    std::string validate_in, validate_out;
    auto* validate = app.add_subcommand("validate", "Label criteria Good/Ordinary/Bad");
    validate->add_option("--criteria", validate_in, "Criteria JSONL")->required();
    validate->add_option("--out", validate_out, "Validated criteria JSONL output")->required();

    // build-tree
    std::string tree_criteria_in, tree_out;
    double xi_flag = 0.0, xi_cluster_flag = 0.0;
    auto* build = app.add_subcommand("build-tree", "Cluster criteria into a reward tree");
    build->add_option("--criteria", tree_criteria_in, "Validated criteria JSONL")->required();
    build->add_option("--out", tree_out, "Tree JSON output")->required();
    auto* xi_opt = build->add_option("--xi", xi_flag, "Merge threshold (cosine distance)");
    auto* xic_opt =
        build->add_option("--xi-cluster", xi_cluster_flag, "Cluster radius (cosine distance)");

    // allocate
    std::string alloc_tree, alloc_traj, alloc_out;
    auto* allocate = app.add_subcommand("allocate", "Score trajectory steps against the tree");
    allocate->add_option("--tree", alloc_tree, "Reward tree JSON")->required();
    allocate->add_option("--trajectories", alloc_traj, "Trajectories JSONL")->required();
    allocate->add_option("--out", alloc_out, "Scored steps JSONL output")->required();

    // pairs
    std::string pairs_scored, pairs_traj, pairs_out, pairs_strategy = "pareto";
    int pairs_per_step_value = 0;
    auto* pairs = app.add_subcommand("pairs", "Build preference pairs from scored steps");
    pairs->add_option("--scored", pairs_scored, "Scored steps JSONL")->required();
    pairs->add_option("--trajectories", pairs_traj, "Trajectories JSONL")->required();
    pairs->add_option("--out", pairs_out, "Preference pairs JSONL output")->required();
    pairs->add_option("--strategy", pairs_strategy, "pareto | random");
    auto* pps_opt = pairs->add_option("--pairs-per-step", pairs_per_step_value,
                                      "Random strategy: override the per-step pair count "
                                      "(default: parity with pareto)");

    // loss
    std::string loss_in;
    double beta_flag = 0.0;
    bool per_record = false;
    auto* loss = app.add_subcommand("loss", "Evaluate the step-wise preference loss");
    loss->add_option("--logprobs", loss_in, "Log-prob records JSONL")->required();
    auto* beta_opt = loss->add_option("--beta", beta_flag, "Loss temperature");
    loss->add_flag("--per-record", per_record, "Print per-record deltas and losses");

    // eval
    std::string eval_gold, eval_pred, eval_scored, eval_out;
    int threshold_value = 0;
    bool macro = false;
    auto* eval = app.add_subcommand("eval", "Step-error metrics against gold labels");
    eval->add_option("--gold", eval_gold, "Gold verdicts JSONL")->required();
    eval->add_option("--pred", eval_pred, "Predicted verdicts JSONL");
    eval->add_option("--scored", eval_scored, "Scored steps JSONL (bridged via threshold)");
    auto* thr_opt = eval->add_option("--threshold", threshold_value,
                                     "Error threshold on the minimum step score");
    eval->add_flag("--macro", macro, "Average per-trajectory instead of pooling steps");
    eval->add_option("--out", eval_out, "Report JSON output");

    // stats
    std::string stats_scored, stats_pairs, stats_out;
    auto* stats = app.add_subcommand("stats", "Run statistics over scored steps and pairs");
    stats->add_option("--scored", stats_scored, "Scored steps JSONL")->required();
    stats->add_option("--pairs", stats_pairs, "Preference pairs JSONL");
    stats->add_option("--out", stats_out, "Stats JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    seed_set = seed_opt->count() > 0;
    max_inflight_set = inflight_opt->count() > 0;
    if (seed_set) g.seed = seed_value;
    if (max_inflight_set) g.max_inflight = max_inflight_value;

    if (extract->parsed()) return dgprm::cli::cmd_extract(pairs_in, extract_out, g);
    if (validate->parsed()) return dgprm::cli::cmd_validate(validate_in, validate_out, g);
    if (build->parsed()) {
        std::optional<double> xi, xic;
        if (xi_opt->count() > 0) xi = xi_flag;
        if (xic_opt->count() > 0) xic = xi_cluster_flag;
        return dgprm::cli::cmd_build_tree(tree_criteria_in, tree_out, xi, xic, g);
    }
    if (allocate->parsed()) return dgprm::cli::cmd_allocate(alloc_tree, alloc_traj, alloc_out, g);
    if (pairs->parsed()) {
        std::optional<int> pps;
        if (pps_opt->count() > 0) pps = pairs_per_step_value;
        return dgprm::cli::cmd_pairs(pairs_scored, pairs_traj, pairs_out, pairs_strategy, pps, g);
    }
    if (loss->parsed()) {
        std::optional<double> beta;
        if (beta_opt->count() > 0) beta = beta_flag;
        return dgprm::cli::cmd_loss(loss_in, beta, per_record, g);
    }
    if (eval->parsed()) {
        std::optional<int> thr;
        if (thr_opt->count() > 0) thr = threshold_value;
        return dgprm::cli::cmd_eval(eval_gold, eval_pred, eval_scored, thr, macro, eval_out, g);
    }
    if (stats->parsed()) return dgprm::cli::cmd_stats(stats_scored, stats_pairs, stats_out, g);
    return 1;
}
