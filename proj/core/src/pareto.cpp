#include "dgprm/pareto.hpp"

#include "dgprm/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace dgprm {

bool dominates(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size())
        throw LengthMismatch("dominates: lengths " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    if (a.empty()) throw LengthMismatch("dominates: empty score vectors");
    bool strict = false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

void check_matrix(const ScoreMatrix& m) {
    if (m.candidate_ids.empty()) throw LengthMismatch("score matrix: no candidates");
    if (m.criterion_ids.empty()) throw LengthMismatch("score matrix: no criteria");
    if (m.values.size() != m.candidate_ids.size())
        throw LengthMismatch("score matrix: row count != candidate count");
    for (const auto& row : m.values) {
        if (row.size() != m.criterion_ids.size())
            throw LengthMismatch("score matrix: ragged row");
    }
}

std::vector<std::string> pareto_front(const ScoreMatrix& m) {
    check_matrix(m);
    const size_t n = m.values.size();
    std::vector<std::string> front;
    for (size_t i = 0; i < n; ++i) {
        bool dominated = false;
        for (size_t j = 0; j < n && !dominated; ++j) {
            if (j != i && dominates(m.values[j], m.values[i])) dominated = true;
        }
        if (!dominated) front.push_back(m.candidate_ids[i]);
    }
    return front;
}

namespace {

size_t index_of(const std::vector<std::string>& ids, const std::string& id) {
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw InvalidArgument("unknown candidate id: " + id);
    return static_cast<size_t>(it - ids.begin());
}

PreferencePair make_pair(const ScoreMatrix& m, const PairContext& ctx, size_t chosen,
                         size_t rejected, bool with_deltas) {
    if (ctx.candidate_texts.size() != m.candidate_ids.size())
        throw LengthMismatch("pair context: texts not aligned with candidates");
    PreferencePair p;
    p.trajectory_id = ctx.trajectory_id;
    p.step_index = ctx.step_index;
    p.prompt = ctx.prompt;
    p.chosen = ctx.candidate_texts[chosen];
    p.rejected = ctx.candidate_texts[rejected];
    p.chosen_id = m.candidate_ids[chosen];
    p.rejected_id = m.candidate_ids[rejected];
    if (p.chosen == p.rejected)
        throw InvalidArgument("preference pair with identical chosen/rejected text (" +
                              p.chosen_id + " vs " + p.rejected_id + ")");
    if (with_deltas) {
        for (size_t k = 0; k < m.criterion_ids.size(); ++k)
            p.dominance_record.emplace_back(m.criterion_ids[k],
                                            m.values[chosen][k] - m.values[rejected][k]);
    }
    return p;
}

} // namespace

std::vector<PreferencePair> build_pairs_pareto(const ScoreMatrix& m, const PairContext& ctx,
                                               int max_pairs) {
    const auto front = pareto_front(m);
    std::vector<PreferencePair> pairs;
    for (const auto& fid : front) {
        const size_t u = index_of(m.candidate_ids, fid);
        for (size_t v = 0; v < m.values.size(); ++v) {
            if (v == u) continue;
            if (dominates(m.values[u], m.values[v])) {
                auto p = make_pair(m, ctx, u, v, /*with_deltas=*/true);
                p.strategy = "pareto";
                pairs.push_back(std::move(p));
            }
        }
    }
    if (max_pairs > 0 && static_cast<int>(pairs.size()) > max_pairs) {
        // Keep the largest-total-delta pairs; stable sort preserves
        // emission order among ties.
        std::vector<size_t> order(pairs.size());
        std::iota(order.begin(), order.end(), size_t{0});
        auto total_delta = [&](size_t i) {
            long s = 0;
            for (const auto& [id, d] : pairs[i].dominance_record) s += d;
            return s;
        };
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return total_delta(a) > total_delta(b); });
        order.resize(static_cast<size_t>(max_pairs));
        std::sort(order.begin(), order.end());
        std::vector<PreferencePair> kept;
        kept.reserve(order.size());
        for (size_t i : order) kept.push_back(std::move(pairs[i]));
        pairs = std::move(kept);
    }
    return pairs;
}

std::vector<PreferencePair> build_pairs_random(const ScoreMatrix& m, const PairContext& ctx,
                                               int target_count, std::uint64_t seed) {
    check_matrix(m);
    const size_t n = m.values.size();
    if (target_count < 0) throw InvalidArgument("build_pairs_random: negative target");
    if (static_cast<size_t>(target_count) > n - 1)
        throw InsufficientCandidates("random pairing needs " + std::to_string(target_count) +
                                     " partners but only " + std::to_string(n - 1) +
                                     " candidates are available");

    // Highest criterion sum wins; ties break by candidate id order.
    size_t best = 0;
    long best_sum = std::accumulate(m.values[0].begin(), m.values[0].end(), 0L);
    for (size_t i = 1; i < n; ++i) {
        const long s = std::accumulate(m.values[i].begin(), m.values[i].end(), 0L);
        if (s > best_sum || (s == best_sum && m.candidate_ids[i] < m.candidate_ids[best])) {
            best = i;
            best_sum = s;
        }
    }

    std::vector<size_t> others;
    for (size_t i = 0; i < n; ++i)
        if (i != best) others.push_back(i);

    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first target_count slots are a uniform
    // draw without replacement.
    for (int k = 0; k < target_count; ++k) {
        std::uniform_int_distribution<size_t> pick(static_cast<size_t>(k), others.size() - 1);
        std::swap(others[static_cast<size_t>(k)], others[pick(rng)]);
    }

    std::vector<PreferencePair> pairs;
    pairs.reserve(static_cast<size_t>(target_count));
    for (int k = 0; k < target_count; ++k) {
        auto p = make_pair(m, ctx, best, others[static_cast<size_t>(k)], /*with_deltas=*/false);
        p.strategy = "random";
        p.seed = seed;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

double selection_ratio(const std::vector<PreferencePair>& pairs, int n_candidates) {
    if (n_candidates < 1) throw InvalidArgument("selection_ratio: n_candidates must be >= 1");
    std::set<std::string> used;
    for (const auto& p : pairs) {
        used.insert(p.chosen_id);
        used.insert(p.rejected_id);
    }
    return static_cast<double>(used.size()) / static_cast<double>(n_candidates);
}

} // namespace dgprm
