// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reccheck/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace reccheck {

using Token = std::string;
using TokenSequence = std::vector<Token>;

/// Skip-gram with negative sampling hyperparameters.
struct EmbeddingConfig {
    /// Window value meaning "every other position in the sequence is context".
    static constexpr std::size_t kWholeSequence = std::numeric_limits<std::size_t>::max();

    std::size_t dim = 32;
    std::size_t window = 3;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double lr_start = 0.025;
    double lr_end = 1e-4;
    std::int64_t min_count = 1;
    std::uint64_t seed = 0;
    std::size_t table_size = 1'000'000; // negative-sampling table slots

    /// Throws ConfigError if any field is out of range.
    void validate() const;
    bool operator==(const EmbeddingConfig&) const = default;
};

/// Trained token vectors ("in" vectors) with cosine geometry. Tokens are
/// stored in lexicographic order.
class EmbeddingSpace {
public:
    EmbeddingSpace() = default;
    EmbeddingSpace(std::size_t dim, std::vector<Token> tokens, std::vector<double> vectors,
                   std::vector<std::int64_t> counts);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }

    const std::vector<Token>& tokens() const { return tokens_; }
    bool contains(const Token& token) const { return index_.count(token) != 0; }
    std::optional<std::size_t> index_of(const Token& token) const;

    std::span<const double> vector(std::size_t index) const;
    /// Throws ConfigError for a token outside the vocabulary.
    std::span<const double> vector(const Token& token) const;
    std::int64_t count(const Token& token) const;
    double norm(std::size_t index) const { return norms_[index]; }

    bool operator==(const EmbeddingSpace& other) const {
        return dim_ == other.dim_ && tokens_ == other.tokens_ && vectors_ == other.vectors_ &&
               counts_ == other.counts_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<Token> tokens_;
    std::vector<double> vectors_; // row-major, size() x dim()
    std::vector<std::int64_t> counts_;
    std::vector<double> norms_;
    std::unordered_map<Token, std::size_t> index_;
};

/// Trains item (or feature) vectors over token sequences. Single-threaded and
/// bit-reproducible for a fixed config. Throws DataError when no sequence
/// of length >= 2 survives min_count filtering, or if the loss goes non-finite.
EmbeddingSpace train_skipgram(const std::vector<TokenSequence>& sequences, const EmbeddingConfig& config);

/// 1 - cos(u, v), clamped to [0, 2]. Throws ConfigError on a length mismatch
/// or a zero-norm argument.
double cosine_distance(std::span<const double> u, std::span<const double> v);

struct Neighbor {
    Token token;
    double distance = 0.0;

    bool operator==(const Neighbor&) const = default;
};

/// Brute-force k nearest tokens by cosine distance, ties by token order.
std::vector<Neighbor> nearest_neighbors(const EmbeddingSpace& space, const Token& query, std::size_t k,
                                        const std::vector<Token>& exclude = {});
std::vector<Neighbor> nearest_neighbors(const EmbeddingSpace& space, std::span<const double> query,
                                        std::size_t k, const std::vector<Token>& exclude = {});

/// Arithmetic mean of the vectors of in-vocabulary tokens. Empty when none
/// of the tokens is known.
std::vector<double> mean_vector(const EmbeddingSpace& space, const std::vector<Token>& tokens);

enum class ItemFeature { brand, category_leaf };

/// Maps sessions to feature-token sequences. Items without the feature are
/// dropped, runs of equal tokens collapse to one, and sequences shorter than
/// two tokens are discarded.
std::vector<TokenSequence> feature_sequences(const SessionSet& sessions, const Catalog& catalog,
                                             ItemFeature feature);

std::vector<TokenSequence> item_sequences(const SessionSet& sessions);

/// jsonl: {"dim": d, "count": n} header, then {"token": ..., "vector": [...]}
/// per token.
void write_space(std::ostream& out, const EmbeddingSpace& space);
EmbeddingSpace read_space(std::istream& in);
void save_space(const std::filesystem::path& path, const EmbeddingSpace& space);
EmbeddingSpace load_space(const std::filesystem::path& path);

namespace sgns {

/// Log-likelihood of one skip-gram sample:
///   log s(out[context] . in[center]) + sum_n log s(-out[n] . in[center]).
double objective(std::span<const double> in, std::span<const double> out, std::size_t dim,
                 std::size_t center, std::size_t context, std::span<const std::size_t> negatives);

/// Gradient of `objective` with respect to the full in/out matrices.
struct Gradient {
    std::vector<double> in;
    std::vector<double> out;
};
Gradient gradient(std::span<const double> in, std::span<const double> out, std::size_t dim,
                  std::size_t center, std::size_t context, std::span<const std::size_t> negatives);

/// One ascent step of size lr on `objective`; all partials use the
/// pre-step parameters. Negatives equal to `context` are skipped, as in
/// training. Returns the objective at the pre-step parameters.
double step(std::span<double> in, std::span<double> out, std::size_t dim, std::size_t center,
            std::size_t context, std::span<const std::size_t> negatives, double lr);

} // namespace sgns

} // namespace reccheck
