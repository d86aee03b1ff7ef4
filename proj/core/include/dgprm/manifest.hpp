#pragma once

/**
 * Run manifest: records per-stage input/output digests so a rerun with
 * identical inputs, parameters, and existing outputs becomes a no-op.
 */

#include "dgprm/backend.hpp"

#include <map>
#include <string>
#include <vector>

namespace dgprm {

struct StageRecord {
    std::map<std::string, std::string> input_digests;  // path -> sha256
    std::map<std::string, std::string> output_digests; // path -> sha256
    std::string params_digest;
    std::string completed_at; // ISO 8601 UTC
    TokenUsage usage;
};

class RunManifest {
public:
    /// Loads the manifest at path, or starts a fresh one when absent.
    static RunManifest load_or_create(const std::string& path);

    /// True when the stage was recorded with exactly these inputs and
    /// parameters and every recorded output still matches its digest.
    bool stage_is_current(const std::string& stage, const std::vector<std::string>& inputs,
                          const std::string& params_digest) const;

    void record_stage(const std::string& stage, const std::vector<std::string>& inputs,
                      const std::vector<std::string>& outputs,
                      const std::string& params_digest, const TokenUsage& usage);

    void save() const;

    const std::string& path() const { return path_; }

private:
    explicit RunManifest(std::string path) : path_(std::move(path)) {}

    std::string path_;
    std::string run_id_;
    std::string created_at_;
    std::map<std::string, StageRecord> stages_;
};

} // namespace dgprm
