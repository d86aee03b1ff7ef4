#include "dgprm/prompts.hpp"

#include "dgprm/allocation.hpp"
#include "dgprm/errors.hpp"

#include <cctype>
#include <sstream>

namespace dgprm {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    lines.push_back(cur);
    return lines;
}

std::string render_context_block(const StepContext& ctx) {
    if (ctx.entries.empty()) return "No previous steps.\n";
    std::ostringstream os;
    os << "Previous steps with their criteria and scores:\n";
    for (const auto& e : ctx.entries) {
        os << "[step " << e.step_index << "] " << e.step_text << "\n";
        if (!e.scores.empty()) {
            os << "  scores:";
            for (const auto& s : e.scores) os << " " << s.criterion_id << "=" << s.score;
            os << "\n";
        }
    }
    return os.str();
}

} // namespace

std::string prompt_role(const std::string& prompt) {
    static constexpr const char* kMarker = "#role: ";
    if (prompt.rfind(kMarker, 0) != 0) return "";
    const size_t eol = prompt.find('\n');
    const size_t start = std::char_traits<char>::length(kMarker);
    return trim(prompt.substr(start, eol == std::string::npos ? std::string::npos
                                                              : eol - start));
}

std::string render_judge_prompt(const ComparisonPair& pair) {
    std::ostringstream os;
    os << "#role: judge\n"
       << "You are comparing two responses to the same problem. Identify the "
          "evaluation criteria that explain why the preferred response is "
          "better than the other one.\n\n"
       << "Problem:\n" << pair.input << "\n\n"
       << "Preferred response:\n" << pair.positive << "\n\n"
       << "Other response:\n" << pair.negative << "\n\n"
       << "List each criterion as a single \"- \" bullet line describing one "
          "evaluation dimension, phrased so it can be reused to judge similar "
          "steps. If the responses are indistinguishable, output NONE.\n";
    return os.str();
}

std::string render_validator_prompt(const std::string& criterion_text) {
    std::ostringstream os;
    os << "#role: validator\n"
       << "Rate the quality of the evaluation criterion below as Good, "
          "Ordinary, or Bad.\n\n"
       << "Criterion:\n" << criterion_text << "\n\n"
       << "Good: relevant to the task, focused on what matters most, "
          "well-defined, and consistently applicable.\n"
       << "Ordinary: usable but vague, incomplete, or hard to apply "
          "consistently.\n"
       << "Bad: irrelevant, misleading, rewarding the wrong behavior, or "
          "impractical to apply.\n\n"
       << "Answer with exactly one label in double brackets, e.g. [[Good]].\n";
    return os.str();
}

std::string render_selector_prompt(const std::string& step,
                                   const std::vector<ParentNode>& parents,
                                   const StepContext& ctx) {
    std::ostringstream os;
    os << "#role: selector\n"
       << "Pick the coarse-grained criteria that apply to the current "
          "reasoning step.\n\n"
       << "Available criteria:\n";
    for (const auto& p : parents) os << p.id << ": " << p.summary << "\n";
    os << "\n" << render_context_block(ctx) << "\n"
       << "Current step:\n" << step << "\n\n"
       << "Output one bracketed list of the applicable criterion ids, e.g. "
          "[P1, P3]. Output [] if none apply.\n";
    return os.str();
}

std::string render_aspect_prompt(const std::string& step, const ParentNode& parent) {
    std::ostringstream os;
    os << "#role: aspect\n"
       << "Decide whether the step below needs evaluation aspects more "
          "specific than the coarse criterion.\n\n"
       << "Coarse criterion (" << parent.id << "): " << parent.summary << "\n\n"
       << "Current step:\n" << step << "\n\n"
       << "If finer-grained aspects are needed, list each as a \"- \" bullet. "
          "If the coarse criterion alone is sufficient, output NONE.\n";
    return os.str();
}

std::string render_scorer_prompt(const std::string& criterion_text, ScoreKind kind,
                                 const std::string& step, const StepContext& ctx) {
    std::ostringstream os;
    os << "#role: scorer\n"
       << "Score the current reasoning step against the criterion below. "
          "Explain your assessment, then end with the score in the exact "
          "format: Score: [[X]]\n\n"
       << "Criterion (" << to_string(kind) << "-grained):\n"
       << criterion_text << "\n\n"
       << render_context_block(ctx) << "\n"
       << "Current step:\n" << step << "\n";
    return os.str();
}

std::string render_summarizer_prompt(const std::vector<std::string>& child_texts) {
    std::ostringstream os;
    os << "#role: summarizer\n"
       << "Write one concise coarse-grained criterion that covers all of the "
          "specific criteria below. Reply with the summary text only.\n\n";
    for (const auto& t : child_texts) os << "- " << t << "\n";
    return os.str();
}

std::optional<std::vector<std::string>> parse_bullet_list(const std::string& response) {
    std::vector<std::string> items;
    bool saw_none = false;
    for (const auto& raw : split_lines(response)) {
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line == "NONE") {
            saw_none = true;
            continue;
        }
        std::string item;
        if (line.size() >= 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ') {
            item = trim(line.substr(2));
        } else {
            size_t i = 0;
            while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
            if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')'))
                item = trim(line.substr(i + 1));
        }
        if (item.empty()) continue;
        bool dup = false;
        for (const auto& seen : items)
            if (seen == item) { dup = true; break; }
        if (!dup) items.push_back(std::move(item));
    }
    if (items.empty() && !saw_none) return std::nullopt;
    return items;
}

Verdict parse_verdict(const std::string& response) {
    struct Label { const char* token; Verdict v; };
    static constexpr Label kLabels[] = {
        {"[[Good]]", Verdict::Good},
        {"[[Ordinary]]", Verdict::Ordinary},
        {"[[Bad]]", Verdict::Bad},
    };
    size_t best_pos = std::string::npos;
    Verdict best = Verdict::Unvalidated;
    for (const auto& l : kLabels) {
        const size_t pos = response.find(l.token);
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best = l.v;
        }
    }
    if (best_pos == std::string::npos)
        throw MalformedResponse("validator response carries no [[Good]]/[[Ordinary]]/[[Bad]] label");
    return best;
}

std::vector<std::string> parse_id_set(const std::string& response) {
    // First single '[' that is not part of a "[[" marker.
    size_t open = std::string::npos;
    for (size_t i = 0; i < response.size(); ++i) {
        if (response[i] != '[') continue;
        if (i + 1 < response.size() && response[i + 1] == '[') { ++i; continue; }
        if (i > 0 && response[i - 1] == '[') continue;
        open = i;
        break;
    }
    if (open == std::string::npos)
        throw MalformedResponse("selector response carries no bracketed id set");
    const size_t close = response.find(']', open + 1);
    if (close == std::string::npos)
        throw MalformedResponse("selector response has an unterminated id set");

    std::vector<std::string> out;
    std::string token;
    for (size_t i = open + 1; i <= close; ++i) {
        if (i == close || response[i] == ',') {
            std::string t = trim(token);
            if (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front())
                t = trim(t.substr(1, t.size() - 2));
            if (!t.empty()) out.push_back(std::move(t));
            token.clear();
        } else {
            token.push_back(response[i]);
        }
    }
    return out;
}

std::pair<int, std::string> parse_score(const std::string& response, int score_min,
                                        int score_max) {
    static constexpr const char* kMarker = "Score: [[";
    size_t pos = std::string::npos;
    size_t search = 0;
    while (true) {
        const size_t hit = response.find(kMarker, search);
        if (hit == std::string::npos) break;
        pos = hit;
        search = hit + 1;
    }
    if (pos == std::string::npos)
        throw MalformedResponse("scorer response carries no Score: [[X]] marker");

    size_t i = pos + std::char_traits<char>::length(kMarker);
    bool neg = false;
    if (i < response.size() && response[i] == '-') {
        neg = true;
        ++i;
    }
    long value = 0;
    size_t digits = 0;
    while (i < response.size() && std::isdigit(static_cast<unsigned char>(response[i]))) {
        value = value * 10 + (response[i] - '0');
        ++i;
        ++digits;
    }
    if (digits == 0 || i + 2 > response.size() || response.compare(i, 2, "]]") != 0)
        throw MalformedResponse("scorer response has a malformed Score marker");
    if (neg) value = -value;
    if (value < score_min || value > score_max)
        throw ScoreOutOfRange("score " + std::to_string(value) + " outside [" +
                              std::to_string(score_min) + ", " + std::to_string(score_max) + "]");
    return {static_cast<int>(value), trim(response.substr(0, pos))};
}

std::string parse_summary(const std::string& response) {
    const auto lines = split_lines(response);
    size_t b = 0;
    while (b < lines.size() && trim(lines[b]).empty()) ++b;
    std::string block;
    for (size_t i = b; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) break;
        if (!block.empty()) block.push_back('\n');
        block += lines[i];
    }
    block = trim(block);
    if (block.empty()) throw MalformedResponse("summarizer returned an empty response");
    return block;
}

} // namespace dgprm
