#include "dgprm/config.hpp"

#include "dgprm/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace dgprm {

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Good: return "Good";
    case Verdict::Ordinary: return "Ordinary";
    case Verdict::Bad: return "Bad";
    case Verdict::Unvalidated: return "Unvalidated";
    }
    return "Unvalidated";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "Good") return Verdict::Good;
    if (s == "Ordinary") return Verdict::Ordinary;
    if (s == "Bad") return Verdict::Bad;
    if (s == "Unvalidated") return Verdict::Unvalidated;
    throw InvalidArgument("unknown verdict label: " + s);
}

std::string to_string(ScoreKind k) {
    return k == ScoreKind::Coarse ? "coarse" : "fine";
}

ScoreKind score_kind_from_string(const std::string& s) {
    if (s == "coarse") return ScoreKind::Coarse;
    if (s == "fine") return ScoreKind::Fine;
    throw InvalidArgument("unknown score kind: " + s);
}

PipelineConfig validate_config(const PipelineConfig& cfg) {
    auto fail = [](const char* field, const std::string& why) {
        throw ConfigError(field, std::string("config: ") + field + " " + why);
    };
    if (!(cfg.xi > 0.0 && cfg.xi < 2.0)) fail("xi", "must be in (0, 2)");
    if (!(cfg.zeta > 0.0 && cfg.zeta < 2.0)) fail("zeta", "must be in (0, 2)");
    if (cfg.mu < 1) fail("mu", "must be positive");
    if (cfg.vote_samples < 1) fail("vote_samples", "must be positive");
    if (cfg.vote_keep < 1) fail("vote_keep", "must be positive");
    if (cfg.vote_keep > cfg.vote_samples) fail("vote_keep", "must be <= vote_samples");
    if (!(cfg.beta > 0.0)) fail("beta", "must be > 0");
    if (cfg.score_min >= cfg.score_max) fail("score_min", "must be < score_max");
    if (!(cfg.xi_cluster > 0.0 && cfg.xi_cluster < 2.0)) fail("xi_cluster", "must be in (0, 2)");
    if (cfg.branching_factor < 2) fail("branching_factor", "must be >= 2");
    if (cfg.dim < 2) fail("dim", "must be >= 2");
    if (cfg.temp_judge < 0.0) fail("temp_judge", "must be >= 0");
    if (cfg.temp_validator < 0.0) fail("temp_validator", "must be >= 0");
    if (cfg.temp_selector < 0.0) fail("temp_selector", "must be >= 0");
    if (cfg.temp_aspect < 0.0) fail("temp_aspect", "must be >= 0");
    if (cfg.temp_scorer < 0.0) fail("temp_scorer", "must be >= 0");
    if (cfg.temp_summarizer < 0.0) fail("temp_summarizer", "must be >= 0");
    if (cfg.max_output_tokens < 1) fail("max_output_tokens", "must be positive");
    if (cfg.keep_verdicts.empty()) fail("keep_verdicts", "must not be empty");
    if (cfg.history_policy != "first" && cfg.history_policy != "pareto")
        fail("history_policy", "must be \"first\" or \"pareto\"");
    if (cfg.error_threshold < cfg.score_min || cfg.error_threshold > cfg.score_max)
        fail("error_threshold", "must lie in [score_min, score_max]");
    if (cfg.max_pairs_per_step < 0) fail("max_pairs_per_step", "must be >= 0");
    if (cfg.backend.max_inflight < 1) fail("backend.max_inflight", "must be positive");
    if (cfg.backend.retry.max_attempts < 1) fail("backend.retry.max_attempts", "must be positive");
    if (cfg.backend.retry.backoff_ms < 0) fail("backend.retry.backoff_ms", "must be >= 0");
    return cfg;
}

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& scope) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) {
            if (it.key() == k) { ok = true; break; }
        }
        if (!ok) throw ConfigError(scope + it.key(), "config: unknown key " + scope + it.key());
    }
}

template <typename T>
void get_if(const json& obj, const char* key, T& into) {
    if (auto it = obj.find(key); it != obj.end()) into = it->get<T>();
}

} // namespace

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("config parse error in " + path + ": " + e.what());
    }
    if (!j.is_object()) throw IoError("config root must be a JSON object: " + path);

    reject_unknown(j, {"xi", "zeta", "mu", "vote_samples", "vote_keep", "beta",
                       "score_min", "score_max", "xi_cluster", "branching_factor",
                       "dim", "temperatures", "max_output_tokens", "keep_verdicts",
                       "history_policy", "error_threshold", "max_pairs_per_step",
                       "backend"},
                   "");

    PipelineConfig cfg;
    get_if(j, "xi", cfg.xi);
    get_if(j, "zeta", cfg.zeta);
    get_if(j, "mu", cfg.mu);
    get_if(j, "vote_samples", cfg.vote_samples);
    get_if(j, "vote_keep", cfg.vote_keep);
    get_if(j, "beta", cfg.beta);
    get_if(j, "score_min", cfg.score_min);
    get_if(j, "score_max", cfg.score_max);
    get_if(j, "xi_cluster", cfg.xi_cluster);
    get_if(j, "branching_factor", cfg.branching_factor);
    get_if(j, "dim", cfg.dim);
    get_if(j, "max_output_tokens", cfg.max_output_tokens);
    get_if(j, "history_policy", cfg.history_policy);
    get_if(j, "error_threshold", cfg.error_threshold);
    get_if(j, "max_pairs_per_step", cfg.max_pairs_per_step);

    if (auto it = j.find("temperatures"); it != j.end()) {
        const json& t = *it;
        reject_unknown(t, {"judge", "validator", "selector", "aspect", "scorer", "summarizer"},
                       "temperatures.");
        get_if(t, "judge", cfg.temp_judge);
        get_if(t, "validator", cfg.temp_validator);
        get_if(t, "selector", cfg.temp_selector);
        get_if(t, "aspect", cfg.temp_aspect);
        get_if(t, "scorer", cfg.temp_scorer);
        get_if(t, "summarizer", cfg.temp_summarizer);
    }
    if (auto it = j.find("keep_verdicts"); it != j.end()) {
        cfg.keep_verdicts.clear();
        for (const auto& v : *it) cfg.keep_verdicts.insert(verdict_from_string(v.get<std::string>()));
    }
    if (auto it = j.find("backend"); it != j.end()) {
        const json& b = *it;
        reject_unknown(b, {"endpoint", "completion_model", "embedding_model", "cache_dir",
                           "max_inflight", "retry", "mock_script", "mock_seed"},
                       "backend.");
        get_if(b, "endpoint", cfg.backend.endpoint);
        get_if(b, "completion_model", cfg.backend.completion_model);
        get_if(b, "embedding_model", cfg.backend.embedding_model);
        get_if(b, "cache_dir", cfg.backend.cache_dir);
        get_if(b, "max_inflight", cfg.backend.max_inflight);
        get_if(b, "mock_script", cfg.backend.mock_script);
        get_if(b, "mock_seed", cfg.backend.mock_seed);
        if (auto rt = b.find("retry"); rt != b.end()) {
            reject_unknown(*rt, {"max_attempts", "backoff_ms"}, "backend.retry.");
            get_if(*rt, "max_attempts", cfg.backend.retry.max_attempts);
            get_if(*rt, "backoff_ms", cfg.backend.retry.backoff_ms);
        }
    }
    return validate_config(cfg);
}

} // namespace dgprm
