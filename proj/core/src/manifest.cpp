#include "dgprm/manifest.hpp"

#include "dgprm/cache.hpp"
#include "dgprm/errors.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace dgprm {

namespace {

using nlohmann::json;

std::string now_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

RunManifest RunManifest::load_or_create(const std::string& path) {
    RunManifest m(path);
    std::ifstream in(path);
    if (!in) {
        m.created_at_ = now_utc();
        m.run_id_ = sha256_hex(m.created_at_ + path).substr(0, 12);
        return m;
    }
    json j;
    try {
        in >> j;
        m.run_id_ = j.value("run_id", "");
        m.created_at_ = j.value("created_at", "");
        if (auto it = j.find("stages"); it != j.end()) {
            for (const auto& [name, sj] : it->items()) {
                StageRecord rec;
                rec.params_digest = sj.value("params_digest", "");
                rec.completed_at = sj.value("completed_at", "");
                if (auto u = sj.find("usage"); u != sj.end()) {
                    rec.usage.input_tokens = u->value("input_tokens", std::int64_t{0});
                    rec.usage.output_tokens = u->value("output_tokens", std::int64_t{0});
                }
                if (auto d = sj.find("inputs"); d != sj.end())
                    rec.input_digests = d->get<std::map<std::string, std::string>>();
                if (auto d = sj.find("outputs"); d != sj.end())
                    rec.output_digests = d->get<std::map<std::string, std::string>>();
                m.stages_[name] = std::move(rec);
            }
        }
    } catch (const json::exception& e) {
        throw IoError("manifest parse error in " + path + ": " + e.what());
    }
    return m;
}

bool RunManifest::stage_is_current(const std::string& stage,
                                   const std::vector<std::string>& inputs,
                                   const std::string& params_digest) const {
    const auto it = stages_.find(stage);
    if (it == stages_.end()) return false;
    const StageRecord& rec = it->second;
    if (rec.params_digest != params_digest) return false;
    if (rec.input_digests.size() != inputs.size()) return false;
    for (const auto& path : inputs) {
        const auto d = rec.input_digests.find(path);
        if (d == rec.input_digests.end()) return false;
        if (!std::filesystem::exists(path) || sha256_file(path) != d->second) return false;
    }
    for (const auto& [path, digest] : rec.output_digests) {
        if (!std::filesystem::exists(path) || sha256_file(path) != digest) return false;
    }
    return true;
}

void RunManifest::record_stage(const std::string& stage,
                               const std::vector<std::string>& inputs,
                               const std::vector<std::string>& outputs,
                               const std::string& params_digest, const TokenUsage& usage) {
    StageRecord rec;
    for (const auto& p : inputs) rec.input_digests[p] = sha256_file(p);
    for (const auto& p : outputs) rec.output_digests[p] = sha256_file(p);
    rec.params_digest = params_digest;
    rec.completed_at = now_utc();
    rec.usage = usage;
    stages_[stage] = std::move(rec);
}

void RunManifest::save() const {
    json j;
    j["run_id"] = run_id_;
    j["created_at"] = created_at_;
    json stages = json::object();
    for (const auto& [name, rec] : stages_) {
        json sj;
        sj["inputs"] = rec.input_digests;
        sj["outputs"] = rec.output_digests;
        sj["params_digest"] = rec.params_digest;
        sj["completed_at"] = rec.completed_at;
        sj["usage"] = {{"input_tokens", rec.usage.input_tokens},
                       {"output_tokens", rec.usage.output_tokens}};
        stages[name] = std::move(sj);
    }
    j["stages"] = std::move(stages);

    const auto parent = std::filesystem::path(path_).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out(path_, std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + path_);
    out << j.dump(2) << "\n";
}

} // namespace dgprm
