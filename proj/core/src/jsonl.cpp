#include "dgprm/jsonl.hpp"

#include "dgprm/errors.hpp"
#include "dgprm/segment.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>

namespace dgprm {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string context_of(const std::string& path, size_t line_no) {
    return path + ":" + std::to_string(line_no);
}

} // namespace

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<json> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Tolerate blank lines and a UTF-8 BOM on the first line.
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        bool blank = true;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
        if (blank) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw IoError("JSONL parse error at " + context_of(path, line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& l : lines) out << l << "\n";
    if (!out) throw IoError("short write to " + path);
}

std::vector<ComparisonPair> read_comparison_pairs(const std::string& path) {
    std::vector<ComparisonPair> out;
    size_t n = 0;
    for (const auto& j : read_jsonl(path)) {
        ++n;
        ComparisonPair p;
        try {
            p.id = j.at("id").get<std::string>();
            p.input = j.at("input").get<std::string>();
            p.positive = j.at("positive").get<std::string>();
            p.negative = j.at("negative").get<std::string>();
        } catch (const json::exception& e) {
            throw IoError("comparison pair record " + std::to_string(n) + " in " + path +
                          ": " + e.what());
        }
        if (p.positive == p.negative)
            throw IoError("comparison pair " + p.id + " has identical positive/negative");
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Criterion> read_criteria(const std::string& path) {
    std::vector<Criterion> out;
    std::set<std::string> ids;
    size_t n = 0;
    for (const auto& j : read_jsonl(path)) {
        ++n;
        Criterion c;
        try {
            c.id = j.at("id").get<std::string>();
            c.text = j.at("text").get<std::string>();
            c.source_ids = j.at("source_ids").get<std::vector<std::string>>();
            c.verdict = verdict_from_string(j.at("verdict").get<std::string>());
        } catch (const json::exception& e) {
            throw IoError("criterion record " + std::to_string(n) + " in " + path + ": " +
                          e.what());
        }
        if (c.text.empty()) throw IoError("criterion " + c.id + " has empty text");
        if (!ids.insert(c.id).second)
            throw IoError("duplicate criterion id " + c.id + " in " + path);
        out.push_back(std::move(c));
    }
    return out;
}

void write_criteria(const std::string& path, const std::vector<Criterion>& cs) {
    std::vector<std::string> lines;
    lines.reserve(cs.size());
    for (const auto& c : cs) {
        ordered_json j;
        j["id"] = c.id;
        j["text"] = c.text;
        j["source_ids"] = c.source_ids;
        j["verdict"] = to_string(c.verdict);
        lines.push_back(j.dump());
    }
    write_lines(path, lines);
}

std::vector<Trajectory> read_trajectories(const std::string& path) {
    std::vector<Trajectory> out;
    size_t n = 0;
    for (const auto& j : read_jsonl(path)) {
        ++n;
        Trajectory t;
        try {
            t.id = j.at("id").get<std::string>();
            t.input = j.at("input").get<std::string>();
            if (j.contains("steps")) {
                t.steps = j.at("steps").get<std::vector<std::string>>();
            }
            if (j.contains("step_candidates")) {
                t.step_candidates =
                    j.at("step_candidates").get<std::vector<std::vector<std::string>>>();
                if (t.steps.empty()) {
                    // The first candidate per step doubles as the step text.
                    for (const auto& cands : t.step_candidates) {
                        if (cands.empty())
                            throw IoError("trajectory " + t.id + " has an empty candidate list");
                        t.steps.push_back(cands.front());
                    }
                }
            }
            if (j.contains("gold_error_steps"))
                t.gold_error_steps = j.at("gold_error_steps").get<std::vector<int>>();
        } catch (const json::exception& e) {
            throw IoError("trajectory record " + std::to_string(n) + " in " + path + ": " +
                          e.what());
        }
        if (t.steps.empty() && j.contains("raw")) {
            try {
                t.steps = segment_steps(j.at("raw").get<std::string>());
            } catch (const EmptyInput& e) {
                throw IoError("trajectory " + t.id + ": " + e.what());
            }
        }
        if (t.steps.empty())
            throw IoError("trajectory " + t.id + " carries neither steps nor candidates nor raw");
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<ScoredStep> read_scored_steps(const std::string& path) {
    std::vector<ScoredStep> out;
    size_t n = 0;
    for (const auto& j : read_jsonl(path)) {
        ++n;
        ScoredStep s;
        try {
            s.trajectory_id = j.at("trajectory_id").get<std::string>();
            s.step_index = j.at("step_index").get<int>();
            s.candidate_id = j.at("candidate_id").get<std::string>();
            for (const auto& sj : j.at("scores")) {
                CriterionScore cs;
                cs.criterion_id = sj.at("criterion_id").get<std::string>();
                cs.kind = score_kind_from_string(sj.at("kind").get<std::string>());
                cs.score = sj.at("score").get<int>();
                cs.rationale = sj.value("rationale", "");
                s.scores.push_back(std::move(cs));
            }
        } catch (const json::exception& e) {
            throw IoError("scored step record " + std::to_string(n) + " in " + path + ": " +
                          e.what());
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_scored_steps(const std::string& path, const std::vector<ScoredStep>& steps) {
    std::vector<std::string> lines;
    lines.reserve(steps.size());
    for (const auto& s : steps) {
        ordered_json j;
        j["trajectory_id"] = s.trajectory_id;
        j["step_index"] = s.step_index;
        j["candidate_id"] = s.candidate_id;
        j["scores"] = ordered_json::array();
        for (const auto& cs : s.scores) {
            ordered_json sj;
            sj["criterion_id"] = cs.criterion_id;
            sj["kind"] = to_string(cs.kind);
            sj["score"] = cs.score;
            sj["rationale"] = cs.rationale;
            j["scores"].push_back(std::move(sj));
        }
        lines.push_back(j.dump());
    }
    write_lines(path, lines);
}

std::vector<PreferencePair> read_preference_pairs(const std::string& path) {
    std::vector<PreferencePair> out;
    size_t n = 0;
    for (const auto& j : read_jsonl(path)) {
        ++n;
        PreferencePair p;
        try {
            p.prompt = j.at("prompt").get<std::string>();
            p.chosen = j.at("chosen").get<std::string>();
            p.rejected = j.at("rejected").get<std::string>();
            p.step_index = j.at("step_index").get<int>();
            p.trajectory_id = j.at("trajectory_id").get<std::string>();
            const auto& meta = j.at("meta");
            p.chosen_id = meta.value("chosen_id", "");
            p.rejected_id = meta.value("rejected_id", "");
            p.strategy = meta.value("strategy", "");
            p.seed = meta.value("seed", std::uint64_t{0});
            if (meta.contains("deltas")) {
                for (const auto& [key, value] : meta.at("deltas").items())
                    p.dominance_record.emplace_back(key, value.get<int>());
            }
        } catch (const json::exception& e) {
            throw IoError("preference pair record " + std::to_string(n) + " in " + path +
                          ": " + e.what());
        }
        out.push_back(std::move(p));
    }
    return out;
}

void write_preference_pairs(const std::string& path,
                            const std::vector<PreferencePair>& pairs) {
    std::vector<std::string> lines;
    lines.reserve(pairs.size());
    for (const auto& p : pairs) {
        ordered_json j;
        j["prompt"] = p.prompt;
        j["chosen"] = p.chosen;
        j["rejected"] = p.rejected;
        j["step_index"] = p.step_index;
        j["trajectory_id"] = p.trajectory_id;
        ordered_json meta;
        meta["chosen_id"] = p.chosen_id;
        meta["rejected_id"] = p.rejected_id;
        meta["strategy"] = p.strategy;
        if (p.strategy == "random") meta["seed"] = p.seed;
        if (!p.dominance_record.empty()) {
            ordered_json deltas;
            for (const auto& [id, d] : p.dominance_record) deltas[id] = d;
            meta["deltas"] = std::move(deltas);
        }
        j["meta"] = std::move(meta);
        lines.push_back(j.dump());
    }
    write_lines(path, lines);
}

std::vector<LogProbRecord> read_logprob_records(const std::string& path) {
    std::vector<LogProbRecord> out;
    size_t n = 0;
    for (const auto& j : read_jsonl(path)) {
        ++n;
        LogProbRecord r;
        try {
            r.lp_theta_pos = j.at("lp_theta_pos").get<double>();
            r.lp_ref_pos = j.at("lp_ref_pos").get<double>();
            r.lp_theta_neg = j.at("lp_theta_neg").get<double>();
            r.lp_ref_neg = j.at("lp_ref_neg").get<double>();
        } catch (const json::exception& e) {
            throw IoError("log-prob record " + std::to_string(n) + " in " + path + ": " +
                          e.what());
        }
        out.push_back(r);
    }
    return out;
}

std::vector<StepVerdicts> read_step_verdicts(const std::string& path) {
    std::vector<StepVerdicts> out;
    size_t n = 0;
    for (const auto& j : read_jsonl(path)) {
        ++n;
        StepVerdicts v;
        try {
            v.trajectory_id = j.at("trajectory_id").get<std::string>();
            v.labels = j.at("labels").get<std::vector<bool>>();
            v.category = j.value("category", "");
        } catch (const json::exception& e) {
            throw IoError("verdict record " + std::to_string(n) + " in " + path + ": " +
                          e.what());
        }
        out.push_back(std::move(v));
    }
    return out;
}

void write_step_verdicts(const std::string& path, const std::vector<StepVerdicts>& vs) {
    std::vector<std::string> lines;
    lines.reserve(vs.size());
    for (const auto& v : vs) {
        ordered_json j;
        j["trajectory_id"] = v.trajectory_id;
        j["labels"] = v.labels;
        if (!v.category.empty()) j["category"] = v.category;
        lines.push_back(j.dump());
    }
    write_lines(path, lines);
}

} // namespace dgprm
