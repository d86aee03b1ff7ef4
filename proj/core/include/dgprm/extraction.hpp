#pragma once

#include "dgprm/backend.hpp"
#include "dgprm/config.hpp"
#include "dgprm/types.hpp"

#include <set>
#include <vector>

namespace dgprm {

/// Asks the judge to compare the pair and parses the bulleted criteria.
/// Exact-duplicate texts within one response collapse to the first
/// occurrence. Criterion ids are "<pair.id>-cN"; verdicts start
/// Unvalidated; source_ids = [pair.id]. An explicit empty list is valid.
std::vector<Criterion> extract_criteria(const ComparisonPair& pair,
                                        CompletionBackend& backend,
                                        const PipelineConfig& cfg);

/// Runs the validator prompt at temperature 0 and parses the first
/// bracketed label.
Verdict validate_criterion(const Criterion& c, CompletionBackend& backend,
                           const PipelineConfig& cfg);

/// Keeps exactly the criteria whose verdict is in `keep`, order preserved.
/// Throws UnvalidatedCriterion when any input is still Unvalidated.
std::vector<Criterion> filter_criteria(const std::vector<Criterion>& cs,
                                       const std::set<Verdict>& keep);

/// Extracts criteria for every pair with bounded parallelism; results are
/// ordered by input pair order.
std::vector<Criterion> extract_all(const std::vector<ComparisonPair>& pairs,
                                   CompletionBackend& backend, const PipelineConfig& cfg);

/// Assigns a verdict to every criterion with bounded parallelism, order
/// preserved.
std::vector<Criterion> validate_all(const std::vector<Criterion>& cs,
                                    CompletionBackend& backend, const PipelineConfig& cfg);

} // namespace dgprm
