#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace simmark {

template <class Scalar>
using EmbeddingT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Sentence embeddings are always held as 64-bit reals.
using Embedding = EmbeddingT<double>;

namespace instructions {
inline constexpr std::string_view kCosine = "Represent the sentence for cosine similarity:";
inline constexpr std::string_view kEuclidean = "Represent the sentence for Euclidean distance:";
inline constexpr std::string_view kPca = "Represent the sentence for PCA:";
} // namespace instructions

enum class EmbedderKind { Remote, Synthetic };

struct EmbedderSpec {
    EmbedderKind kind = EmbedderKind::Synthetic;
    std::string endpoint;
    std::string model_id = "synthetic";
    std::string instruction{instructions::kCosine};
    int dim = 768;
    std::uint64_t seed = 0;
    int timeout_ms = 30000;
    int max_retries = 3;
    int backoff_ms = 200;
    int batch_size = 32;
    /// Bearer token for the remote endpoint. Never written to any output.
    std::string api_key;
};

/// Deterministic unit vector for `text`. Each lower-cased alphanumeric token
/// seeds `dim` standard normal draws and the token vectors are summed, so texts
/// sharing words get correlated embeddings; texts without tokens hash whole.
Embedding synthetic_embed(std::uint64_t seed, std::string_view text, int dim);

/// Throws DimensionMismatch on wrong length, InvalidRequest on non-finite values.
void check_embedding(const Embedding& v, int dim);

/// Embedder implementations must be safe to call from several threads.
class Embedder {
public:
    virtual ~Embedder() = default;

    /// One vector per text. Throws EmptyInput for an empty list or an empty text.
    virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
    virtual const EmbedderSpec& spec() const noexcept = 0;

    Embedding embed_one(const std::string& text);
};

class SyntheticEmbedder final : public Embedder {
public:
    explicit SyntheticEmbedder(EmbedderSpec spec);
    std::vector<Embedding> embed(std::span<const std::string> texts) override;
    const EmbedderSpec& spec() const noexcept override { return spec_; }

private:
    EmbedderSpec spec_;
};

/// Client for POST {endpoint}/v1/embed.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(EmbedderSpec spec);
    std::vector<Embedding> embed(std::span<const std::string> texts) override;
    const EmbedderSpec& spec() const noexcept override { return spec_; }

private:
    EmbedderSpec spec_;
};

struct EmbeddingCacheKey {
    std::string digest; // hex SHA-256 of the text bytes
    std::string instruction;
    std::string model_id;

    auto operator<=>(const EmbeddingCacheKey&) const = default;
};

std::string text_digest(std::string_view text);

/// Content-addressed embedding store with atomic get-or-insert. Concurrent
/// requests for a key that is being computed wait for the first computation.
/// When backed by a file, every new entry is appended as one JSON line with
/// 17-significant-digit values, so reloading gives bit-identical vectors.
class EmbeddingCache {
public:
    EmbeddingCache() = default;
    explicit EmbeddingCache(const std::filesystem::path& file);

    using ComputeFn = std::function<std::vector<Embedding>(const std::vector<std::string>&)>;

    std::vector<Embedding> get_or_compute(const std::vector<EmbeddingCacheKey>& keys,
                                          std::span<const std::string> texts, const ComputeFn& compute);

    std::size_t size() const;
    /// Number of texts handed to a compute function so far.
    std::size_t computed() const;

private:
    void append_record(const EmbeddingCacheKey& key, const Embedding& v);

    mutable std::mutex mutex_;
    std::map<EmbeddingCacheKey, std::shared_future<Embedding>> entries_;
    std::size_t computed_ = 0;
    std::ofstream file_;
};

class CachedEmbedder final : public Embedder {
public:
    CachedEmbedder(std::shared_ptr<Embedder> inner, std::shared_ptr<EmbeddingCache> cache);
    std::vector<Embedding> embed(std::span<const std::string> texts) override;
    const EmbedderSpec& spec() const noexcept override { return inner_->spec(); }

private:
    std::shared_ptr<Embedder> inner_;
    std::shared_ptr<EmbeddingCache> cache_;
};

/// Builds the embedder described by `spec`, wrapped in `cache` when given.
std::shared_ptr<Embedder> make_embedder(const EmbedderSpec& spec,
                                        std::shared_ptr<EmbeddingCache> cache = nullptr);

} // namespace simmark
