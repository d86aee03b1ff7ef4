#include "dgprm/metrics.hpp"

#include "dgprm/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace dgprm {

bool step_is_erroneous(const ScoredStep& ss, int threshold) {
    if (ss.scores.empty()) return false;
    int min_score = ss.scores.front().score;
    for (const auto& s : ss.scores) min_score = std::min(min_score, s.score);
    return min_score <= threshold;
}

StepVerdicts verdicts_from_scores(const std::string& trajectory_id,
                                  const std::vector<ScoredStep>& steps, int threshold) {
    int max_index = 0;
    for (const auto& s : steps) {
        if (s.trajectory_id != trajectory_id)
            throw AlignmentError("scored step for trajectory " + s.trajectory_id +
                                 " mixed into " + trajectory_id);
        max_index = std::max(max_index, s.step_index);
    }
    StepVerdicts v;
    v.trajectory_id = trajectory_id;
    v.labels.assign(static_cast<size_t>(max_index), false);
    std::set<int> seen;
    for (const auto& s : steps) {
        if (s.step_index < 1) throw AlignmentError("step index must be 1-based");
        if (!seen.insert(s.step_index).second)
            throw AlignmentError("duplicate step " + std::to_string(s.step_index) +
                                 " in trajectory " + trajectory_id);
        v.labels[static_cast<size_t>(s.step_index - 1)] = step_is_erroneous(s, threshold);
    }
    if (static_cast<int>(seen.size()) != max_index)
        throw AlignmentError("trajectory " + trajectory_id + " has step gaps");
    return v;
}

namespace {

double f1(long tp, long fp, long fn) {
    const long denom = 2 * tp + fp + fn;
    if (denom == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

MetricReport report_from_counts(const ConfusionCounts& c) {
    MetricReport r;
    r.counts = c;
    r.f1_error = f1(c.tp, c.fp, c.fn);
    // Correct as the positive class swaps the roles: TN becomes TP and
    // FP/FN exchange places.
    r.f1_correct = f1(c.tn, c.fn, c.fp);
    r.prm_score = (r.f1_error + r.f1_correct) / 2.0;
    return r;
}

ConfusionCounts count_pair(const StepVerdicts& pred, const StepVerdicts& gold) {
    ConfusionCounts c;
    for (size_t i = 0; i < gold.labels.size(); ++i) {
        const bool p = pred.labels[i];
        const bool g = gold.labels[i];
        if (p && g) ++c.tp;
        else if (p && !g) ++c.fp;
        else if (!p && g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

} // namespace

MetricReport prm_score(const std::vector<StepVerdicts>& pred,
                       const std::vector<StepVerdicts>& gold, bool macro) {
    if (pred.empty() || gold.empty()) throw AlignmentError("prm_score: empty verdict list");

    std::map<std::string, const StepVerdicts*> by_id;
    for (const auto& p : pred) {
        if (!by_id.emplace(p.trajectory_id, &p).second)
            throw AlignmentError("duplicate prediction for trajectory " + p.trajectory_id);
    }

    ConfusionCounts pooled;
    std::map<std::string, ConfusionCounts> per_category;
    double macro_sum = 0.0;

    for (const auto& g : gold) {
        const auto it = by_id.find(g.trajectory_id);
        if (it == by_id.end())
            throw AlignmentError("no prediction for trajectory " + g.trajectory_id);
        const StepVerdicts& p = *it->second;
        if (p.labels.size() != g.labels.size())
            throw AlignmentError("trajectory " + g.trajectory_id + ": prediction has " +
                                 std::to_string(p.labels.size()) + " steps, gold has " +
                                 std::to_string(g.labels.size()));
        const auto c = count_pair(p, g);
        pooled.tp += c.tp;
        pooled.fp += c.fp;
        pooled.fn += c.fn;
        pooled.tn += c.tn;
        if (!g.category.empty()) {
            auto& cat = per_category[g.category];
            cat.tp += c.tp;
            cat.fp += c.fp;
            cat.fn += c.fn;
            cat.tn += c.tn;
        }
        if (macro) macro_sum += report_from_counts(c).prm_score;
    }

    MetricReport r = report_from_counts(pooled);
    if (macro) r.prm_score = macro_sum / static_cast<double>(gold.size());
    for (const auto& [name, counts] : per_category)
        r.per_category[name] = report_from_counts(counts);
    return r;
}

RunStats run_stats(const std::vector<ScoredStep>& scored,
                   const std::vector<PreferencePair>& pairs) {
    RunStats st;
    st.scored_steps = static_cast<std::int64_t>(scored.size());
    if (!scored.empty()) {
        std::int64_t coarse = 0, fine = 0;
        for (const auto& s : scored) {
            for (const auto& cs : s.scores)
                (cs.kind == ScoreKind::Coarse ? coarse : fine) += 1;
        }
        st.avg_coarse_per_step = static_cast<double>(coarse) / static_cast<double>(scored.size());
        st.avg_fine_per_step = static_cast<double>(fine) / static_cast<double>(scored.size());
    }

    std::set<std::string> candidates;
    for (const auto& s : scored)
        candidates.insert(s.trajectory_id + "\x1f" + std::to_string(s.step_index) + "\x1f" +
                          s.candidate_id);
    std::set<std::string> used;
    auto mark = [&](const PreferencePair& p, const std::string& cid) {
        const auto key =
            p.trajectory_id + "\x1f" + std::to_string(p.step_index) + "\x1f" + cid;
        if (candidates.count(key)) used.insert(key);
    };
    for (const auto& p : pairs) {
        ++st.pair_counts[p.strategy.empty() ? "unknown" : p.strategy];
        mark(p, p.chosen_id);
        mark(p, p.rejected_id);
    }
    if (!candidates.empty())
        st.selection_ratio =
            static_cast<double>(used.size()) / static_cast<double>(candidates.size());
    return st;
}

} // namespace dgprm
