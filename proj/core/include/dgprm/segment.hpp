#pragma once

#include <string>
#include <vector>

namespace dgprm {

/// Splits raw model output into ordered step texts.
///
/// When explicit "Step N" labels appear at line starts ("Step 1", "Step1",
/// "step 2:", "Step 3.", case-insensitive), the text is split at label
/// boundaries with each label kept inside its step; any lines before the
/// first label become a single preamble step. Without labels, every
/// non-blank line is one step.
///
/// Throws EmptyInput when the input is blank or a labeled step carries no
/// content after its label.
std::vector<std::string> segment_steps(const std::string& raw_text);

} // namespace dgprm
