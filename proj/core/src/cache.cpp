#include "dgprm/cache.hpp"

#include "dgprm/errors.hpp"
#include "dgprm/geometry.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace dgprm {

namespace {

std::string to_hex(const unsigned char* bytes, size_t n) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(n * 2, '0');
    for (size_t i = 0; i < n; ++i) {
        out[2 * i] = kHex[bytes[i] >> 4];
        out[2 * i + 1] = kHex[bytes[i] & 0xf];
    }
    return out;
}

struct EvpCtx {
    EVP_MD_CTX* ctx;
    EvpCtx() : ctx(EVP_MD_CTX_new()) {
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
            throw IoError("sha256: cannot initialize digest");
    }
    ~EvpCtx() { EVP_MD_CTX_free(ctx); }
};

} // namespace

std::string sha256_hex(const std::string& bytes) {
    EvpCtx c;
    if (EVP_DigestUpdate(c.ctx, bytes.data(), bytes.size()) != 1)
        throw IoError("sha256: digest update failed");
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(c.ctx, out, &len) != 1)
        throw IoError("sha256: digest final failed");
    return to_hex(out, len);
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for hashing: " + path.string());
    EvpCtx c;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const auto got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(c.ctx, buf, static_cast<size_t>(got)) != 1)
            throw IoError("sha256: digest update failed");
    }
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(c.ctx, out, &len) != 1)
        throw IoError("sha256: digest final failed");
    return to_hex(out, len);
}

CacheKey CacheKey::for_completion(const std::string& backend_kind,
                                  const CompletionRequest& req) {
    nlohmann::json body = {
        {"kind", backend_kind},
        {"model", req.model},
        {"request",
         {{"prompt", req.prompt},
          {"temperature", req.temperature},
          {"n_samples", req.n_samples},
          {"max_output_tokens", req.max_output_tokens}}},
    };
    return CacheKey{sha256_hex(body.dump())};
}

CacheKey CacheKey::for_embedding(const std::string& backend_kind,
                                 const std::string& model,
                                 const std::vector<std::string>& texts) {
    nlohmann::json body = {
        {"kind", backend_kind},
        {"model", model},
        {"request", {{"input", texts}}},
    };
    return CacheKey{sha256_hex(body.dump())};
}

DiskCache::DiskCache(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw IoError("cannot create cache directory " + root_.string() + ": " + ec.message());
}

std::filesystem::path DiskCache::path_for(const CacheKey& key) const {
    return root_ / key.digest.substr(0, 2) / (key.digest + ".json");
}

std::mutex& DiskCache::shard_for(const CacheKey& key) const {
    const char c = key.digest.empty() ? '0' : key.digest[0];
    const int nibble = (c >= 'a') ? (c - 'a' + 10) : (c - '0');
    return shards_[static_cast<size_t>(nibble & 0xf)];
}

std::optional<std::string> DiskCache::get(const CacheKey& key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void DiskCache::put(const CacheKey& key, const std::string& canonical_body) {
    const auto dest = path_for(key);
    std::lock_guard<std::mutex> lock(shard_for(key));
    std::error_code ec;
    std::filesystem::create_directories(dest.parent_path(), ec);
    if (ec) throw IoError("cache: cannot create " + dest.parent_path().string());
    // Write-then-rename keeps concurrent readers off partial files.
    const auto tmp = dest.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cache: cannot write " + tmp);
        out << canonical_body;
    }
    std::filesystem::rename(tmp, dest, ec);
    if (ec) throw IoError("cache: cannot publish " + dest.string() + ": " + ec.message());
}

std::string canonical_response_body(const BackendResponse& resp) {
    nlohmann::json j = {
        {"texts", resp.texts},
        {"usage",
         {{"input_tokens", resp.usage.input_tokens},
          {"output_tokens", resp.usage.output_tokens}}},
    };
    return j.dump();
}

BackendResponse response_from_body(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponse(std::string("cached response body is not JSON: ") + e.what());
    }
    BackendResponse resp;
    try {
        resp.texts = j.at("texts").get<std::vector<std::string>>();
        resp.usage.input_tokens = j.at("usage").at("input_tokens").get<std::int64_t>();
        resp.usage.output_tokens = j.at("usage").at("output_tokens").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponse(std::string("cached response body missing fields: ") + e.what());
    }
    return resp;
}

BackendResponse CachedCompletionBackend::complete(const CompletionRequest& req) {
    const auto key = CacheKey::for_completion(inner_->kind(), req);
    if (auto hit = cache_->get(key)) return response_from_body(*hit);
    const auto resp = inner_->complete(req);
    // Round the miss path through the canonical body so hit and miss
    // return byte-identical payloads.
    const auto body = canonical_response_body(resp);
    cache_->put(key, body);
    return response_from_body(body);
}

std::vector<EmbeddingVector> CachedEmbeddingBackend::embed(
    const std::vector<std::string>& texts, const std::string& model) {
    const auto key = CacheKey::for_embedding(inner_->kind(), model, texts);
    auto decode = [](const std::string& body) {
        nlohmann::json j = nlohmann::json::parse(body);
        return j.at("vectors").get<std::vector<EmbeddingVector>>();
    };
    if (auto hit = cache_->get(key)) {
        try {
            return decode(*hit);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedResponse(std::string("cached embedding body invalid: ") + e.what());
        }
    }
    auto vecs = inner_->embed(texts, model);
    nlohmann::json j = {{"vectors", vecs}};
    const auto body = j.dump();
    cache_->put(key, body);
    return decode(body);
}

} // namespace dgprm
