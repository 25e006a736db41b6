#include "simmark/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "simmark/error.hpp"
#include "simmark/http_client.hpp"
#include "simmark/rng.hpp"

namespace simmark {
namespace {

bool token_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

void add_gaussian(Embedding& acc, std::uint64_t seed) {
    rng::SplitMix64 engine(seed);
    for (Eigen::Index i = 0; i < acc.size(); ++i) acc[i] += rng::standard_normal(engine);
}

void require_texts(std::span<const std::string> texts) {
    if (texts.empty()) throw Error(Errc::EmptyInput, "no texts to embed");
    for (const auto& t : texts)
        if (t.empty()) throw Error(Errc::EmptyInput, "cannot embed an empty text");
}

} // namespace

Embedding synthetic_embed(std::uint64_t seed, std::string_view text, int dim) {
    Embedding v = Embedding::Zero(dim);
    const std::uint64_t basis = rng::splitmix64(seed ^ 0x5EEDF00Dull);
    std::string token;
    bool any = false;
    auto flush = [&] {
        if (token.empty()) return;
        add_gaussian(v, rng::fnv1a64(token, basis));
        token.clear();
        any = true;
    };
    for (unsigned char c : text) {
        if (token_char(c)) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    if (!any) add_gaussian(v, rng::fnv1a64(text, basis ^ 0xA5A5A5A5ull));
    return v / v.norm();
}

void check_embedding(const Embedding& v, int dim) {
    if (v.size() != dim)
        throw Error(Errc::DimensionMismatch,
                    fmt::format("expected dimension {}, got {}", dim, v.size()));
    if (!v.allFinite()) throw Error(Errc::InvalidRequest, "embedding has non-finite values");
}

Embedding Embedder::embed_one(const std::string& text) {
    return embed(std::span<const std::string>(&text, 1)).front();
}

SyntheticEmbedder::SyntheticEmbedder(EmbedderSpec spec) : spec_(std::move(spec)) {
    if (spec_.dim < 2) throw Error(Errc::InvalidConfig, "synthetic embedder needs dim >= 2");
}

std::vector<Embedding> SyntheticEmbedder::embed(std::span<const std::string> texts) {
    require_texts(texts);
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(synthetic_embed(spec_.seed, t, spec_.dim));
    return out;
}

RemoteEmbedder::RemoteEmbedder(EmbedderSpec spec) : spec_(std::move(spec)) {
    if (spec_.endpoint.empty()) throw Error(Errc::InvalidConfig, "remote embedder needs an endpoint");
    if (spec_.batch_size < 1) throw Error(Errc::InvalidConfig, "batch_size must be positive");
}

std::vector<Embedding> RemoteEmbedder::embed(std::span<const std::string> texts) {
    require_texts(texts);
    const http::RetryPolicy policy{spec_.timeout_ms, spec_.max_retries, spec_.backoff_ms, spec_.api_key};
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += static_cast<std::size_t>(spec_.batch_size)) {
        const auto batch = texts.subspan(start, std::min<std::size_t>(spec_.batch_size, texts.size() - start));
        nlohmann::json body = {{"model", spec_.model_id},
                               {"instruction", spec_.instruction},
                               {"texts", std::vector<std::string>(batch.begin(), batch.end())}};
        const auto reply = http::post_json(spec_.endpoint, "/v1/embed", body, policy, Errc::RemoteUnavailable);
        if (!reply.contains("vectors") || !reply["vectors"].is_array() || reply["vectors"].size() != batch.size())
            throw Error(Errc::RemoteUnavailable, "embed reply must carry one vector per text");
        for (const auto& row : reply["vectors"]) {
            if (!row.is_array()) throw Error(Errc::RemoteUnavailable, "embed reply vector is not an array");
            if (static_cast<int>(row.size()) != spec_.dim)
                throw Error(Errc::DimensionMismatch,
                            fmt::format("endpoint returned dimension {}, expected {}", row.size(), spec_.dim));
            Embedding v(spec_.dim);
            for (int i = 0; i < spec_.dim; ++i) v[i] = row[static_cast<std::size_t>(i)].get<double>();
            check_embedding(v, spec_.dim);
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::string text_digest(std::string_view text) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(Errc::IoError, "SHA-256 digest failed");
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

EmbeddingCache::EmbeddingCache(const std::filesystem::path& file) {
    if (std::filesystem::exists(file)) {
        std::ifstream in(file);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                const auto rec = nlohmann::json::parse(line);
                EmbeddingCacheKey key{rec.at("digest").get<std::string>(), rec.at("instruction").get<std::string>(),
                                      rec.at("model").get<std::string>()};
                const auto& values = rec.at("values");
                Embedding v(static_cast<Eigen::Index>(values.size()));
                for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i].get<double>();
                std::promise<Embedding> p;
                p.set_value(std::move(v));
                entries_[std::move(key)] = p.get_future().share();
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::ParseError, fmt::format("{}:{}: {}", file.string(), lineno, e.what()));
            }
        }
    }
    file_.open(file, std::ios::app);
    if (!file_) throw Error(Errc::IoError, "cannot open cache file " + file.string());
}

void EmbeddingCache::append_record(const EmbeddingCacheKey& key, const Embedding& v) {
    if (!file_.is_open()) return;
    std::string line = fmt::format(R"({{"digest":{},"model":{},"instruction":{},"dim":{},"values":[)",
                                   nlohmann::json(key.digest).dump(), nlohmann::json(key.model_id).dump(),
                                   nlohmann::json(key.instruction).dump(), v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) line += ',';
        line += fmt::format("{:.17g}", v[i]);
    }
    line += "]}\n";
    file_ << line;
    file_.flush();
}

std::vector<Embedding> EmbeddingCache::get_or_compute(const std::vector<EmbeddingCacheKey>& keys,
                                                      std::span<const std::string> texts,
                                                      const ComputeFn& compute) {
    std::vector<std::shared_future<Embedding>> futures(keys.size());
    std::vector<std::size_t> owned;
    std::vector<std::promise<Embedding>> promises;
    {
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (auto it = entries_.find(keys[i]); it != entries_.end()) {
                futures[i] = it->second;
                continue;
            }
            auto& promise = promises.emplace_back();
            futures[i] = promise.get_future().share();
            entries_.emplace(keys[i], futures[i]);
            owned.push_back(i);
        }
        computed_ += owned.size();
    }

    if (!owned.empty()) {
        std::vector<std::string> batch;
        batch.reserve(owned.size());
        for (auto i : owned) batch.push_back(texts[i]);
        try {
            auto vectors = compute(batch);
            if (vectors.size() != owned.size())
                throw Error(Errc::EmbedderUnavailable, "embedder returned the wrong number of vectors");
            std::lock_guard lock(mutex_);
            for (std::size_t j = 0; j < owned.size(); ++j) {
                append_record(keys[owned[j]], vectors[j]);
                promises[j].set_value(std::move(vectors[j]));
            }
        } catch (...) {
            std::lock_guard lock(mutex_);
            for (std::size_t j = 0; j < owned.size(); ++j) {
                entries_.erase(keys[owned[j]]);
                promises[j].set_exception(std::current_exception());
            }
            throw;
        }
    }

    std::vector<Embedding> out;
    out.reserve(keys.size());
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::size_t EmbeddingCache::computed() const {
    std::lock_guard lock(mutex_);
    return computed_;
}

CachedEmbedder::CachedEmbedder(std::shared_ptr<Embedder> inner, std::shared_ptr<EmbeddingCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<Embedding> CachedEmbedder::embed(std::span<const std::string> texts) {
    require_texts(texts);
    const auto& s = inner_->spec();
    std::vector<EmbeddingCacheKey> keys;
    keys.reserve(texts.size());
    for (const auto& t : texts) keys.push_back({text_digest(t), s.instruction, s.model_id});
    return cache_->get_or_compute(keys, texts, [this](const std::vector<std::string>& batch) {
        return inner_->embed(batch);
    });
}

std::shared_ptr<Embedder> make_embedder(const EmbedderSpec& spec, std::shared_ptr<EmbeddingCache> cache) {
    std::shared_ptr<Embedder> base;
    if (spec.kind == EmbedderKind::Remote) {
        base = std::make_shared<RemoteEmbedder>(spec);
    } else {
        base = std::make_shared<SyntheticEmbedder>(spec);
    }
    if (cache) return std::make_shared<CachedEmbedder>(std::move(base), std::move(cache));
    return base;
}

} // namespace simmark
