#include "dgprm/segment.hpp"

#include "dgprm/errors.hpp"

#include <cctype>
#include <string_view>

namespace dgprm {

namespace {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
    return lines;
}

// Matches "Step" + optional space + integer + optional ":" or "." at the
// start of a line (leading whitespace allowed, case-insensitive). Returns
// the offset just past the label, or npos.
size_t match_step_label(const std::string& line) {
    size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    static constexpr std::string_view kWord = "step";
    for (char expect : kWord) {
        if (i >= line.size() ||
            std::tolower(static_cast<unsigned char>(line[i])) != expect)
            return std::string::npos;
        ++i;
    }
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t digits = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
        ++i;
        ++digits;
    }
    if (digits == 0) return std::string::npos;
    if (i < line.size() && (line[i] == ':' || line[i] == '.')) ++i;
    return i;
}

std::string join_range(const std::vector<std::string>& lines, size_t b, size_t e) {
    std::string out;
    for (size_t i = b; i < e; ++i) {
        if (i > b) out.push_back('\n');
        out += lines[i];
    }
    return out;
}

} // namespace

std::vector<std::string> segment_steps(const std::string& raw_text) {
    if (trim(raw_text).empty()) throw EmptyInput("segment_steps: blank input");

    const auto lines = split_lines(raw_text);
    std::vector<size_t> label_at;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (match_step_label(lines[i]) != std::string::npos) label_at.push_back(i);
    }

    std::vector<std::string> steps;
    if (label_at.empty()) {
        for (const auto& line : lines) {
            auto t = trim(line);
            if (!t.empty()) steps.push_back(std::move(t));
        }
        return steps;
    }

    // Labels win from the first label onward; anything before it becomes a
    // single preamble step.
    if (auto preamble = trim(join_range(lines, 0, label_at.front())); !preamble.empty())
        steps.push_back(std::move(preamble));

    for (size_t k = 0; k < label_at.size(); ++k) {
        const size_t begin = label_at[k];
        const size_t end = (k + 1 < label_at.size()) ? label_at[k + 1] : lines.size();
        auto step = trim(join_range(lines, begin, end));
        // Content check: strip the label itself and require something left.
        const size_t after = match_step_label(lines[begin]);
        std::string body = lines[begin].substr(after);
        body += join_range(lines, begin + 1, end);
        if (trim(body).empty())
            throw EmptyInput("segment_steps: step " + std::to_string(k + 1) +
                             " is empty after its label");
        steps.push_back(std::move(step));
    }
    return steps;
}

} // namespace dgprm
