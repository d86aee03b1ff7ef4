#pragma once

/**
 * Prompt renderers and response parsers for every model role in the
 * pipeline: judge (criteria extraction), validator (quality filter),
 * selector (parent voting), aspect (fine-grained analysis), scorer, and
 * summarizer.
 *
 * Every rendered prompt starts with a role marker line "#role: <name>" so
 * scripted offline backends can dispatch on it; real endpoints simply see
 * one extra header line.
 */

#include "dgprm/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dgprm {

struct StepContext; // allocation.hpp

/// Extracts the role name from a prompt's "#role: ..." first line; empty
/// string when the marker is absent.
std::string prompt_role(const std::string& prompt);

std::string render_judge_prompt(const ComparisonPair& pair);
std::string render_validator_prompt(const std::string& criterion_text);
std::string render_selector_prompt(const std::string& step,
                                   const std::vector<ParentNode>& parents,
                                   const StepContext& ctx);
std::string render_aspect_prompt(const std::string& step, const ParentNode& parent);
std::string render_scorer_prompt(const std::string& criterion_text, ScoreKind kind,
                                 const std::string& step, const StepContext& ctx);
std::string render_summarizer_prompt(const std::vector<std::string>& child_texts);

/// Parses a bulleted or numbered list ("- x", "* x", "1. x", "1) x") into
/// items, collapsing exact duplicates while preserving first-seen order.
/// A line consisting of just "NONE" yields an explicit empty list.
/// Returns nullopt when the response contains neither items nor the NONE
/// sentinel.
std::optional<std::vector<std::string>> parse_bullet_list(const std::string& response);

/// First bracketed verdict label wins. Throws MalformedResponse when no
/// [[Good]] / [[Ordinary]] / [[Bad]] marker is present.
Verdict parse_verdict(const std::string& response);

/// Parses the first single-bracketed id set, e.g. "[P1, P2]" or "[]".
/// Items are matched downstream; this returns the raw trimmed tokens.
/// Throws MalformedResponse when no set marker exists.
std::vector<std::string> parse_id_set(const std::string& response);

/// Parses the last "Score: [[X]]" marker. Returns the integer and the text
/// preceding the marker (the rationale). Throws MalformedResponse when the
/// marker is missing and ScoreOutOfRange when X falls outside
/// [score_min, score_max].
std::pair<int, std::string> parse_score(const std::string& response, int score_min,
                                        int score_max);

/// First non-empty line block (paragraph), trimmed. Throws
/// MalformedResponse on effectively empty output.
std::string parse_summary(const std::string& response);

} // namespace dgprm
