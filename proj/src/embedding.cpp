// SPDX-License-Identifier: Apache-2.0
#include "reccheck/embedding.hpp"

#include "reccheck/error.hpp"
#include "reccheck/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace reccheck {

using nlohmann::json;

void EmbeddingConfig::validate() const {
    if (dim < 2) throw ConfigError("embedding dim must be >= 2");
    if (window == 0) throw ConfigError("embedding window must be positive");
    if (negatives == 0) throw ConfigError("negatives must be positive");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (!(lr_start > 0) || !(lr_end > 0)) throw ConfigError("learning rates must be positive");
    if (!(lr_end < lr_start)) throw ConfigError("lr_end must be smaller than lr_start");
    if (min_count < 1) throw ConfigError("min_count must be positive");
    if (table_size == 0) throw ConfigError("negative table size must be positive");
}

// ---------------------------------------------------------------------------
// EmbeddingSpace

EmbeddingSpace::EmbeddingSpace(std::size_t dim, std::vector<Token> tokens, std::vector<double> vectors,
                               std::vector<std::int64_t> counts)
    : dim_(dim), tokens_(std::move(tokens)), vectors_(std::move(vectors)), counts_(std::move(counts)) {
    if (vectors_.size() != tokens_.size() * dim_ || counts_.size() != tokens_.size())
        throw DataError("embedding space: inconsistent sizes");
    // Keep tokens sorted so iteration order never depends on insertion order.
    std::vector<std::size_t> order(tokens_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return tokens_[a] < tokens_[b]; });
    if (!std::is_sorted(tokens_.begin(), tokens_.end())) {
        std::vector<Token> t;
        std::vector<double> v;
        std::vector<std::int64_t> c;
        for (auto i : order) {
            t.push_back(tokens_[i]);
            v.insert(v.end(), vectors_.begin() + i * dim_, vectors_.begin() + (i + 1) * dim_);
            c.push_back(counts_[i]);
        }
        tokens_ = std::move(t);
        vectors_ = std::move(v);
        counts_ = std::move(c);
    }
    norms_.resize(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!index_.emplace(tokens_[i], i).second)
            throw DataError("embedding space: duplicate token '" + tokens_[i] + "'");
        double sq = 0.0;
        for (double x : vector(i)) {
            if (!std::isfinite(x)) throw DataError("embedding space: non-finite component for '" + tokens_[i] + "'");
            sq += x * x;
        }
        norms_[i] = std::sqrt(sq);
    }
}

std::optional<std::size_t> EmbeddingSpace::index_of(const Token& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const double> EmbeddingSpace::vector(std::size_t index) const {
    return {vectors_.data() + index * dim_, dim_};
}

std::span<const double> EmbeddingSpace::vector(const Token& token) const {
    auto idx = index_of(token);
    if (!idx) throw ConfigError("token '" + token + "' is not in the embedding vocabulary");
    return vector(*idx);
}

std::int64_t EmbeddingSpace::count(const Token& token) const {
    auto idx = index_of(token);
    return idx ? counts_[*idx] : 0;
}

// ---------------------------------------------------------------------------
// SGNS primitives

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log_sigmoid(double x) {
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

} // namespace

namespace sgns {

double objective(std::span<const double> in, std::span<const double> out, std::size_t dim, std::size_t center,
                 std::size_t context, std::span<const std::size_t> negatives) {
    const double* v = in.data() + center * dim;
    double total = log_sigmoid(dot(out.data() + context * dim, v, dim));
    for (auto n : negatives) {
        if (n == context) continue;
        total += log_sigmoid(-dot(out.data() + n * dim, v, dim));
    }
    return total;
}

Gradient gradient(std::span<const double> in, std::span<const double> out, std::size_t dim, std::size_t center,
                  std::size_t context, std::span<const std::size_t> negatives) {
    Gradient g{std::vector<double>(in.size(), 0.0), std::vector<double>(out.size(), 0.0)};
    const double* v = in.data() + center * dim;
    auto accumulate = [&](std::size_t target, double coeff) {
        const double* u = out.data() + target * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            g.in[center * dim + d] += coeff * u[d];
            g.out[target * dim + d] += coeff * v[d];
        }
    };
    accumulate(context, 1.0 - sigmoid(dot(out.data() + context * dim, v, dim)));
    for (auto n : negatives) {
        if (n == context) continue;
        accumulate(n, -sigmoid(dot(out.data() + n * dim, v, dim)));
    }
    return g;
}

double step(std::span<double> in, std::span<double> out, std::size_t dim, std::size_t center, std::size_t context,
            std::span<const std::size_t> negatives, double lr) {
    double* v = in.data() + center * dim;
    // Coefficients first, so every partial uses the pre-step parameters.
    thread_local std::vector<double> coeffs;
    thread_local std::vector<double> v_grad;
    coeffs.assign(negatives.size() + 1, 0.0);
    v_grad.assign(dim, 0.0);

    const double pos = dot(out.data() + context * dim, v, dim);
    double loss = log_sigmoid(pos);
    coeffs[0] = 1.0 - sigmoid(pos);
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        if (negatives[i] == context) continue;
        const double s = dot(out.data() + negatives[i] * dim, v, dim);
        loss += log_sigmoid(-s);
        coeffs[i + 1] = -sigmoid(s);
    }

    auto gather = [&](std::size_t target, double c) {
        const double* u = out.data() + target * dim;
        for (std::size_t d = 0; d < dim; ++d) v_grad[d] += c * u[d];
    };
    gather(context, coeffs[0]);
    for (std::size_t i = 0; i < negatives.size(); ++i)
        if (negatives[i] != context) gather(negatives[i], coeffs[i + 1]);

    auto scatter = [&](std::size_t target, double c) {
        double* u = out.data() + target * dim;
        for (std::size_t d = 0; d < dim; ++d) u[d] += lr * c * v[d];
    };
    scatter(context, coeffs[0]);
    for (std::size_t i = 0; i < negatives.size(); ++i)
        if (negatives[i] != context) scatter(negatives[i], coeffs[i + 1]);

    for (std::size_t d = 0; d < dim; ++d) v[d] += lr * v_grad[d];
    return loss;
}

} // namespace sgns

// ---------------------------------------------------------------------------
// Training

namespace {

std::vector<std::size_t> build_negative_table(const std::vector<std::int64_t>& counts, std::size_t slots) {
    std::vector<double> weights(counts.size());
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        weights[i] = std::pow(static_cast<double>(counts[i]), 0.75);
        total += weights[i];
    }
    std::vector<std::size_t> table(slots);
    std::size_t token = 0;
    double cumulative = weights[0] / total;
    for (std::size_t slot = 0; slot < slots; ++slot) {
        table[slot] = token;
        if (static_cast<double>(slot + 1) / static_cast<double>(slots) > cumulative && token + 1 < counts.size()) {
            ++token;
            cumulative += weights[token] / total;
        }
    }
    return table;
}

} // namespace

EmbeddingSpace train_skipgram(const std::vector<TokenSequence>& sequences, const EmbeddingConfig& config) {
    config.validate();

    std::map<Token, std::int64_t> raw_counts;
    for (const auto& seq : sequences)
        for (const auto& tok : seq) ++raw_counts[tok];

    std::vector<Token> vocab;
    std::vector<std::int64_t> counts;
    std::unordered_map<Token, std::size_t> ids;
    for (const auto& [tok, c] : raw_counts) {
        if (c < config.min_count) continue;
        ids.emplace(tok, vocab.size());
        vocab.push_back(tok);
        counts.push_back(c);
    }
    if (vocab.empty()) throw DataError("skip-gram: empty vocabulary after min_count filtering");

    std::vector<std::vector<std::size_t>> corpus;
    for (const auto& seq : sequences) {
        std::vector<std::size_t> mapped;
        for (const auto& tok : seq)
            if (auto it = ids.find(tok); it != ids.end()) mapped.push_back(it->second);
        if (mapped.size() >= 2) corpus.push_back(std::move(mapped));
    }
    if (corpus.empty()) throw DataError("skip-gram: no sequence of length >= 2 after min_count filtering");

    const std::size_t dim = config.dim;
    const std::size_t n_vocab = vocab.size();
    Rng rng(config.seed);

    std::vector<double> in(n_vocab * dim);
    std::vector<double> out(n_vocab * dim, 0.0);
    for (auto& x : in) x = (rng.uniform() - 0.5) / static_cast<double>(dim);

    const auto table = build_negative_table(counts, config.table_size);

    auto context_span = [&](std::size_t len, std::size_t pos) {
        const std::size_t w = std::min(config.window, len);
        const std::size_t lo = pos >= w ? pos - w : 0;
        const std::size_t hi = std::min(len - 1, pos + w);
        return std::pair{lo, hi};
    };

    std::uint64_t pairs_per_epoch = 0;
    for (const auto& seq : corpus)
        for (std::size_t pos = 0; pos < seq.size(); ++pos) {
            auto [lo, hi] = context_span(seq.size(), pos);
            pairs_per_epoch += hi - lo;
        }
    const double total_pairs = static_cast<double>(pairs_per_epoch * config.epochs);

    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> negatives(config.negatives);
    std::uint64_t processed = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        for (auto s : order) {
            const auto& seq = corpus[s];
            for (std::size_t pos = 0; pos < seq.size(); ++pos) {
                auto [lo, hi] = context_span(seq.size(), pos);
                for (std::size_t c = lo; c <= hi; ++c) {
                    if (c == pos) continue;
                    for (auto& n : negatives) n = table[rng.below(table.size())];
                    const double lr = config.lr_start - (config.lr_start - config.lr_end) *
                                                            (static_cast<double>(processed) / total_pairs);
                    const double loss = sgns::step(in, out, dim, seq[pos], seq[c], negatives, lr);
                    if (!std::isfinite(loss))
                        throw DataError("skip-gram: non-finite loss at epoch " + std::to_string(epoch) +
                                        ", pair " + std::to_string(processed) + " (center '" +
                                        vocab[seq[pos]] + "')");
                    ++processed;
                }
            }
        }
    }

    return EmbeddingSpace(dim, std::move(vocab), std::move(in), std::move(counts));
}

// ---------------------------------------------------------------------------
// Queries

double cosine_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw ConfigError("cosine_distance: vector lengths differ");
    const double uv = dot(u.data(), v.data(), u.size());
    const double uu = dot(u.data(), u.data(), u.size());
    const double vv = dot(v.data(), v.data(), v.size());
    if (uu == 0.0 || vv == 0.0) throw ConfigError("cosine_distance: zero-norm vector");
    const double d = 1.0 - uv / (std::sqrt(uu) * std::sqrt(vv));
    return std::clamp(d, 0.0, 2.0);
}

namespace {

std::vector<Neighbor> rank_neighbors(const EmbeddingSpace& space, std::span<const double> query, std::size_t k,
                                     const std::unordered_set<Token>& exclude) {
    if (query.size() != space.dim()) throw ConfigError("nearest_neighbors: query dimension mismatch");
    std::vector<Neighbor> all;
    all.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& tok = space.tokens()[i];
        if (exclude.count(tok)) continue;
        all.push_back(Neighbor{tok, cosine_distance(query, space.vector(i))});
    }
    auto less = [](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.token < b.token;
    };
    const std::size_t keep = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), less);
    all.resize(keep);
    return all;
}

} // namespace

std::vector<Neighbor> nearest_neighbors(const EmbeddingSpace& space, const Token& query, std::size_t k,
                                        const std::vector<Token>& exclude) {
    auto idx = space.index_of(query);
    if (!idx) throw ConfigError("nearest_neighbors: unknown query token '" + query + "'");
    std::unordered_set<Token> skip(exclude.begin(), exclude.end());
    skip.insert(query);
    return rank_neighbors(space, space.vector(*idx), k, skip);
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingSpace& space, std::span<const double> query, std::size_t k,
                                        const std::vector<Token>& exclude) {
    return rank_neighbors(space, query, k, std::unordered_set<Token>(exclude.begin(), exclude.end()));
}

std::vector<double> mean_vector(const EmbeddingSpace& space, const std::vector<Token>& tokens) {
    std::vector<double> mean;
    std::size_t found = 0;
    for (const auto& tok : tokens) {
        auto idx = space.index_of(tok);
        if (!idx) continue;
        if (mean.empty()) mean.assign(space.dim(), 0.0);
        auto v = space.vector(*idx);
        for (std::size_t d = 0; d < v.size(); ++d) mean[d] += v[d];
        ++found;
    }
    for (auto& x : mean) x /= static_cast<double>(found);
    return mean;
}

std::vector<TokenSequence> feature_sequences(const SessionSet& sessions, const Catalog& catalog,
                                             ItemFeature feature) {
    std::vector<TokenSequence> out;
    for (const auto& session : sessions) {
        TokenSequence seq;
        for (const auto& item : session.items) {
            const ItemMeta* meta = catalog.find(item);
            if (!meta) continue;
            std::optional<Token> tok;
            if (feature == ItemFeature::brand) {
                tok = meta->brand;
            } else if (!meta->category_path.empty()) {
                tok = join_category_path(meta->category_path);
            }
            if (!tok) continue;
            if (!seq.empty() && seq.back() == *tok) continue;
            seq.push_back(std::move(*tok));
        }
        if (seq.size() >= 2) out.push_back(std::move(seq));
    }
    return out;
}

std::vector<TokenSequence> item_sequences(const SessionSet& sessions) {
    std::vector<TokenSequence> out;
    out.reserve(sessions.size());
    for (const auto& s : sessions) out.push_back(s.items);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

void write_space(std::ostream& out, const EmbeddingSpace& space) {
    out << json{{"dim", space.dim()}, {"count", space.size()}}.dump() << '\n';
    for (std::size_t i = 0; i < space.size(); ++i) {
        auto v = space.vector(i);
        json row = {{"token", space.tokens()[i]},
                    {"vector", std::vector<double>(v.begin(), v.end())},
                    {"n", space.count(space.tokens()[i])}};
        out << row.dump() << '\n';
    }
}

EmbeddingSpace read_space(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("embedding file: missing header");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("embedding file: bad header: ") + e.what());
    }
    if (!header.contains("dim") || !header.contains("count"))
        throw DataError("embedding file: header needs dim and count");
    const auto dim = header["dim"].get<std::size_t>();
    const auto count = header["count"].get<std::size_t>();

    std::vector<Token> tokens;
    std::vector<double> vectors;
    std::vector<std::int64_t> counts;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json row;
        try {
            row = json::parse(line);
            tokens.push_back(row.at("token").get<std::string>());
            auto v = row.at("vector").get<std::vector<double>>();
            if (v.size() != dim) throw DataError("vector length " + std::to_string(v.size()) + " != dim");
            vectors.insert(vectors.end(), v.begin(), v.end());
            counts.push_back(row.value("n", std::int64_t{0}));
        } catch (const json::exception& e) {
            throw DataError("embedding file line " + std::to_string(line_no) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("embedding file line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (tokens.size() != count)
        throw DataError("embedding file: header count " + std::to_string(count) + " but " +
                        std::to_string(tokens.size()) + " rows");
    return EmbeddingSpace(dim, std::move(tokens), std::move(vectors), std::move(counts));
}

void save_space(const std::filesystem::path& path, const EmbeddingSpace& space) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    write_space(out, space);
}

EmbeddingSpace load_space(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_space(in);
}

} // namespace reccheck
