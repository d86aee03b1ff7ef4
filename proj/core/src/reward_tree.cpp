#include "dgprm/reward_tree.hpp"

#include "dgprm/errors.hpp"
#include "dgprm/geometry.hpp"
#include "dgprm/prompts.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace dgprm {

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const std::string& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                           static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
        i += 3;
    }
    const size_t rem = bytes.size() - i;
    if (rem == 1) {
        const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rem == 2) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

std::string b64_decode(const std::string& in) {
    if (in.size() % 4 != 0) throw CorruptEmbedding("base64 payload length not a multiple of 4");
    std::string out;
    out.reserve(in.size() / 4 * 3);
    for (size_t i = 0; i < in.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = in[i + k];
            if (c == '=') {
                if (i + 4 != in.size() || k < 2) throw CorruptEmbedding("misplaced base64 padding");
                vals[k] = 0;
                ++pad;
            } else {
                vals[k] = b64_value(c);
                if (vals[k] < 0) throw CorruptEmbedding("invalid base64 character");
                if (pad > 0) throw CorruptEmbedding("base64 data after padding");
            }
        }
        const unsigned v = (static_cast<unsigned>(vals[0]) << 18) |
                           (static_cast<unsigned>(vals[1]) << 12) |
                           (static_cast<unsigned>(vals[2]) << 6) |
                           static_cast<unsigned>(vals[3]);
        out.push_back(static_cast<char>((v >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<char>((v >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<char>(v & 0xff));
    }
    return out;
}

static_assert(std::endian::native == std::endian::little,
              "tree serialization assumes a little-endian host");

} // namespace

std::string embedding_to_b64(const EmbeddingVector& v) {
    std::string bytes(v.size() * 4, '\0');
    for (size_t i = 0; i < v.size(); ++i) {
        const float f = static_cast<float>(v[i]);
        std::memcpy(bytes.data() + i * 4, &f, 4);
    }
    return b64_encode(bytes);
}

EmbeddingVector embedding_from_b64(const std::string& b64, int expected_dim) {
    const std::string bytes = b64_decode(b64);
    if (bytes.size() != static_cast<size_t>(expected_dim) * 4)
        throw CorruptEmbedding("embedding payload is " + std::to_string(bytes.size()) +
                               " bytes, expected " + std::to_string(expected_dim * 4));
    EmbeddingVector v(static_cast<size_t>(expected_dim));
    for (size_t i = 0; i < v.size(); ++i) {
        float f;
        std::memcpy(&f, bytes.data() + i * 4, 4);
        v[i] = static_cast<double>(f);
    }
    return v;
}

DedupResult dedup_merge(const std::vector<Criterion>& cs, double xi) {
    DedupResult result;
    for (const auto& incoming : cs) {
        if (!incoming.embedding)
            throw InvalidArgument("dedup_merge: criterion " + incoming.id + " not embedded");
        if (!result.kept.empty() &&
            incoming.embedding->size() != result.kept.front().embedding->size())
            throw DimensionMismatch("dedup_merge: mixed embedding dimensions");

        size_t hit = result.kept.size();
        for (size_t i = 0; i < result.kept.size(); ++i) {
            if (cosine_distance(*result.kept[i].embedding, *incoming.embedding) <= xi) {
                hit = i;
                break;
            }
        }
        if (hit == result.kept.size()) {
            result.kept.push_back(incoming);
            continue;
        }

        Criterion& retained = result.kept[hit];
        MergeRecord rec;
        if (incoming.text.size() > retained.text.size()) {
            // Longer text wins: the incoming criterion takes over the slot
            // and the retained one is recorded as absorbed.
            rec.absorbed_id = retained.id;
            rec.into_id = incoming.id;
            rec.kept_text_len = incoming.text.size();
            rec.absorbed_text_len = retained.text.size();
            Criterion merged = incoming;
            for (const auto& sid : retained.source_ids) {
                if (std::find(merged.source_ids.begin(), merged.source_ids.end(), sid) ==
                    merged.source_ids.end())
                    merged.source_ids.push_back(sid);
            }
            retained = std::move(merged);
        } else {
            rec.absorbed_id = incoming.id;
            rec.into_id = retained.id;
            rec.kept_text_len = retained.text.size();
            rec.absorbed_text_len = incoming.text.size();
            for (const auto& sid : incoming.source_ids) {
                if (std::find(retained.source_ids.begin(), retained.source_ids.end(), sid) ==
                    retained.source_ids.end())
                    retained.source_ids.push_back(sid);
            }
        }
        result.merges.push_back(std::move(rec));
    }
    return result;
}

std::string summarize_parent(const std::vector<Criterion>& children,
                             CompletionBackend& backend, const PipelineConfig& cfg) {
    if (children.empty()) throw InvalidArgument("summarize_parent: no children");
    std::vector<std::string> texts;
    texts.reserve(children.size());
    for (const auto& c : children) texts.push_back(c.text);

    CompletionRequest req;
    req.model = cfg.backend.completion_model;
    req.prompt = render_summarizer_prompt(texts);
    req.temperature = cfg.temp_summarizer;
    req.n_samples = 1;
    req.max_output_tokens = cfg.max_output_tokens;
    const auto resp = backend.complete(req);
    return parse_summary(resp.texts.at(0));
}

BuildResult build_tree(const std::vector<Criterion>& cs, const PipelineConfig& cfg,
                       EmbeddingBackend& embedder, CompletionBackend& completer) {
    if (cs.empty()) throw EmptyInput("build_tree: no criteria");

    std::vector<std::string> texts;
    texts.reserve(cs.size());
    for (const auto& c : cs) {
        if (c.text.empty()) throw InvalidArgument("build_tree: criterion " + c.id + " has empty text");
        texts.push_back(c.text);
    }

    const auto raw = embed_checked(embedder, texts, cfg.backend.embedding_model);
    std::vector<Criterion> embedded = cs;
    for (size_t i = 0; i < embedded.size(); ++i)
        embedded[i].embedding = quantize_f32(normalize(raw[i]));

    DedupResult dedup = dedup_merge(embedded, cfg.xi);

    auto params = CFTreeParams::from_cosine_radius(cfg.xi_cluster, cfg.branching_factor);
    CFTree cf(params);
    for (const auto& c : dedup.kept) cf.insert(*c.embedding, c.id);

    std::map<std::string, const Criterion*> by_id;
    for (const auto& c : dedup.kept) by_id[c.id] = &c;

    BuildResult out;
    out.merges = std::move(dedup.merges);
    RewardTree& tree = out.tree;
    tree.version = kTreeFormatVersion;
    tree.embedding_model = cfg.backend.embedding_model;
    tree.dim = embedder.dim();
    tree.xi = cfg.xi;
    tree.xi_cluster = cfg.xi_cluster;

    int pn = 0;
    for (const auto& entry : cf.leaf_entries()) {
        ParentNode parent;
        parent.id = "P" + std::to_string(++pn);
        EmbeddingVector mean(static_cast<size_t>(tree.dim), 0.0);
        for (const auto& id : entry.member_ids) {
            const Criterion& c = *by_id.at(id);
            parent.children.push_back(c);
            for (size_t k = 0; k < mean.size(); ++k) mean[k] += (*c.embedding)[k];
        }
        for (auto& x : mean) x /= static_cast<double>(parent.children.size());
        parent.centroid = quantize_f32(normalize(mean));
        parent.summary = summarize_parent(parent.children, completer, cfg);
        tree.parents.push_back(std::move(parent));
    }
    check_tree(tree);
    return out;
}

void check_tree(const RewardTree& t) {
    if (t.version != kTreeFormatVersion)
        throw FormatVersionMismatch("tree version \"" + t.version + "\" != " + kTreeFormatVersion);
    if (t.dim < 2) throw CorruptEmbedding("tree dim must be >= 2");
    std::set<std::string> seen;
    for (const auto& p : t.parents) {
        if (p.summary.empty()) throw IoError("parent " + p.id + " has an empty summary");
        if (p.children.empty()) throw IoError("parent " + p.id + " has no children");
        if (static_cast<int>(p.centroid.size()) != t.dim)
            throw CorruptEmbedding("parent " + p.id + " centroid has wrong length");
        require_finite(p.centroid, "tree centroid");
        for (const auto& c : p.children) {
            if (c.text.empty()) throw IoError("criterion " + c.id + " has empty text");
            if (!c.embedding) throw CorruptEmbedding("criterion " + c.id + " has no embedding");
            if (static_cast<int>(c.embedding->size()) != t.dim)
                throw CorruptEmbedding("criterion " + c.id + " embedding has wrong length");
            require_finite(*c.embedding, "tree embedding");
            if (!seen.insert(c.id).second)
                throw IoError("criterion " + c.id + " appears under more than one parent");
        }
    }
}

void save_tree(const RewardTree& t, const std::string& path) {
    check_tree(t);
    nlohmann::ordered_json j;
    j["version"] = t.version;
    j["embedding_model"] = t.embedding_model;
    j["dim"] = t.dim;
    j["xi"] = t.xi;
    j["xi_cluster"] = t.xi_cluster;
    j["parents"] = nlohmann::ordered_json::array();
    for (const auto& p : t.parents) {
        nlohmann::ordered_json pj;
        pj["id"] = p.id;
        pj["summary"] = p.summary;
        pj["centroid_b64"] = embedding_to_b64(p.centroid);
        pj["children"] = nlohmann::ordered_json::array();
        for (const auto& c : p.children) {
            nlohmann::ordered_json cj;
            cj["id"] = c.id;
            cj["text"] = c.text;
            cj["embedding_b64"] = embedding_to_b64(*c.embedding);
            cj["source_ids"] = c.source_ids;
            pj["children"].push_back(std::move(cj));
        }
        j["parents"].push_back(std::move(pj));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write tree file: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("short write to tree file: " + path);
}

RewardTree load_tree(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tree file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("tree file parse error in " + path + ": " + e.what());
    }

    RewardTree t;
    try {
        t.version = j.at("version").get<std::string>();
        if (t.version != kTreeFormatVersion)
            throw FormatVersionMismatch("tree file " + path + " has version \"" + t.version +
                                        "\", expected " + kTreeFormatVersion);
        t.embedding_model = j.at("embedding_model").get<std::string>();
        t.dim = j.at("dim").get<int>();
        t.xi = j.at("xi").get<double>();
        t.xi_cluster = j.at("xi_cluster").get<double>();
        for (const auto& pj : j.at("parents")) {
            ParentNode p;
            p.id = pj.at("id").get<std::string>();
            p.summary = pj.at("summary").get<std::string>();
            p.centroid = embedding_from_b64(pj.at("centroid_b64").get<std::string>(), t.dim);
            for (const auto& cj : pj.at("children")) {
                Criterion c;
                c.id = cj.at("id").get<std::string>();
                c.text = cj.at("text").get<std::string>();
                c.embedding = embedding_from_b64(cj.at("embedding_b64").get<std::string>(), t.dim);
                c.source_ids = cj.at("source_ids").get<std::vector<std::string>>();
                p.children.push_back(std::move(c));
            }
            t.parents.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("tree file " + path + " is missing fields: " + e.what());
    }
    check_tree(t);
    return t;
}

} // namespace dgprm
