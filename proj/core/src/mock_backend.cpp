#include "dgprm/mock_backend.hpp"

#include "dgprm/errors.hpp"
#include "dgprm/geometry.hpp"
#include "dgprm/prompts.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>

namespace dgprm {

namespace {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in (0, 1); never exactly 0, so log() below is safe.
double to_unit_interval(std::uint64_t z) {
    return (static_cast<double>(z >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

} // namespace

EmbeddingVector mock_embed(const std::string& text, int d, std::uint64_t seed) {
    if (d < 2) throw InvalidArgument("mock_embed: d must be >= 2");
    const std::uint64_t key = splitmix64(fnv1a64(text) ^ (seed * 0x9e3779b97f4a7c15ULL + 1));

    EmbeddingVector v(static_cast<size_t>(d));
    // Counter mode: draw k-th output as splitmix64(key + k), pair them up
    // through Box-Muller.
    std::uint64_t counter = 0;
    for (int i = 0; i < d; i += 2) {
        const double u1 = to_unit_interval(splitmix64(key + counter++));
        const double u2 = to_unit_interval(splitmix64(key + counter++));
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        v[static_cast<size_t>(i)] = r * std::cos(a);
        if (i + 1 < d) v[static_cast<size_t>(i + 1)] = r * std::sin(a);
    }
    return normalize(v);
}

std::vector<EmbeddingVector> MockEmbeddingBackend::embed(
    const std::vector<std::string>& texts, const std::string& /*model*/) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(mock_embed(t, dim_, seed_));
    return out;
}

std::vector<EmbeddingVector> embed_checked(EmbeddingBackend& backend,
                                           const std::vector<std::string>& texts,
                                           const std::string& model) {
    if (texts.empty()) throw InvalidArgument("embed: empty text list");
    for (const auto& t : texts)
        if (t.empty()) throw InvalidArgument("embed: empty text");
    auto vecs = backend.embed(texts, model);
    if (vecs.size() != texts.size())
        throw DimensionMismatch("embed: backend returned " + std::to_string(vecs.size()) +
                                " vectors for " + std::to_string(texts.size()) + " texts");
    for (const auto& v : vecs) {
        if (static_cast<int>(v.size()) != backend.dim())
            throw DimensionMismatch("embed: vector length " + std::to_string(v.size()) +
                                    " != configured dim " + std::to_string(backend.dim()));
        require_finite(v, "embed");
    }
    return vecs;
}

MockCompletionBackend MockCompletionBackend::from_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mock script: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("mock script parse error in " + path + ": " + e.what());
    }
    if (j.value("version", "") != "dgprm-mock/1")
        throw FormatVersionMismatch("mock script version must be dgprm-mock/1: " + path);

    std::vector<MockRule> rules;
    for (const auto& r : j.at("rules")) {
        MockRule rule;
        rule.role = r.value("role", "*");
        if (auto it = r.find("contains"); it != r.end()) {
            if (it->is_string()) {
                rule.contains.push_back(it->get<std::string>());
            } else {
                for (const auto& c : *it) rule.contains.push_back(c.get<std::string>());
            }
        }
        for (const auto& o : r.at("outputs")) rule.outputs.push_back(o.get<std::string>());
        if (rule.outputs.empty())
            throw IoError("mock script rule with empty outputs: " + path);
        rules.push_back(std::move(rule));
    }
    return MockCompletionBackend(std::move(rules));
}

BackendResponse MockCompletionBackend::complete(const CompletionRequest& req) {
    if (req.n_samples < 1) throw InvalidArgument("complete: n_samples must be >= 1");
    if (req.temperature < 0.0) throw InvalidArgument("complete: temperature must be >= 0");

    const std::string role = prompt_role(req.prompt);
    const MockRule* hit = nullptr;
    for (const auto& rule : rules_) {
        if (rule.role != "*" && rule.role != role) continue;
        bool all = true;
        for (const auto& needle : rule.contains) {
            if (req.prompt.find(needle) == std::string::npos) {
                all = false;
                break;
            }
        }
        if (all) {
            hit = &rule;
            break;
        }
    }
    if (!hit)
        throw TransportError("mock backend: no scripted rule matches role \"" + role + "\"");

    BackendResponse resp;
    resp.texts.reserve(static_cast<size_t>(req.n_samples));
    for (int i = 0; i < req.n_samples; ++i) {
        const auto& text = hit->outputs[static_cast<size_t>(i) % hit->outputs.size()];
        resp.texts.push_back(text);
        resp.usage.output_tokens += static_cast<std::int64_t>(text.size() / 4 + 1);
    }
    resp.usage.input_tokens = static_cast<std::int64_t>(req.prompt.size() / 4 + 1);
    return resp;
}

} // namespace dgprm
