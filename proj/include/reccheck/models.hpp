// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reccheck/dataset.hpp"
#include "reccheck/embedding.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace reccheck {

using Query = std::vector<ItemId>;

/// Ranked recommendations for one query. `scores` is either empty or
/// parallel to `items` and non-increasing.
struct PredictionList {
    std::vector<ItemId> items;
    std::vector<double> scores;

    bool empty() const { return items.empty(); }
    bool operator==(const PredictionList&) const = default;
};

/// Black-box recommender. predict returns one list per query, order-aligned,
/// each with at most k items, no duplicates and no item from its own query.
class RecModel {
public:
    virtual ~RecModel() = default;
    virtual std::string name() const = 0;
    virtual std::vector<PredictionList> predict(const std::vector<Query>& queries, std::size_t k) const = 0;
    /// False for models whose answers may change between identical calls.
    virtual bool deterministic() const { return true; }
    /// Items stripped from responses for breaking the invariants so far.
    virtual std::size_t sanitized_items() const { return 0; }
};

/// Returns a description of every invariant broken by `list`, empty if none.
std::vector<std::string> contract_violations(const PredictionList& list, const Query& query, std::size_t k);

struct Sanitized {
    PredictionList list;
    std::size_t violations = 0;
};

/// Drops duplicate items, query items, items beyond k, and items whose score
/// rises above the previous kept score. Each dropped item is one violation;
/// a partial score list is discarded and counted once.
Sanitized sanitize_prediction(PredictionList list, const Query& query, std::size_t k);

/// Most popular training items first; ties in lexicographic order.
class PopularityModel : public RecModel {
public:
    explicit PopularityModel(const SessionSet& train);
    std::string name() const override { return "popularity"; }
    std::vector<PredictionList> predict(const std::vector<Query>& queries, std::size_t k) const override;

    const std::vector<std::pair<ItemId, std::int64_t>>& ranking() const { return ranking_; }

private:
    std::vector<std::pair<ItemId, std::int64_t>> ranking_;
};

/// Session co-occurrence counts: C[a][b] is the number of sessions holding
/// both a and b. score(c) sums C[q][c] over query items; ties fall back to
/// popularity, then item id.
class CooccurrenceModel : public RecModel {
public:
    explicit CooccurrenceModel(const SessionSet& train);
    std::string name() const override { return "cooccurrence"; }
    std::vector<PredictionList> predict(const std::vector<Query>& queries, std::size_t k) const override;

    std::int64_t count(const ItemId& a, const ItemId& b) const;

private:
    std::vector<ItemId> items_;                   // sorted by (popularity desc, id)
    std::unordered_map<ItemId, std::size_t> rank_; // position in items_
    std::vector<std::unordered_map<std::size_t, std::int64_t>> counts_;
};

/// Mean of the query items' vectors, then cosine kNN with query items
/// excluded. Queries with no in-vocabulary item get an empty list.
class Prod2VecModel : public RecModel {
public:
    explicit Prod2VecModel(std::shared_ptr<const EmbeddingSpace> space);
    std::string name() const override { return "p2v"; }
    std::vector<PredictionList> predict(const std::vector<Query>& queries, std::size_t k) const override;

private:
    std::shared_ptr<const EmbeddingSpace> space_;
};

/// Returns each case's ground truth as its top-1; unknown queries get nothing.
class OracleModel : public RecModel {
public:
    explicit OracleModel(const std::vector<TestCase>& cases);
    std::string name() const override { return "oracle"; }
    std::vector<PredictionList> predict(const std::vector<Query>& queries, std::size_t k) const override;

private:
    std::unordered_map<std::string, ItemId> answers_;
};

/// A fixed list minus the query items.
class ConstantModel : public RecModel {
public:
    explicit ConstantModel(std::vector<ItemId> items, std::string name = "constant");
    std::string name() const override { return name_; }
    std::vector<PredictionList> predict(const std::vector<Query>& queries, std::size_t k) const override;

private:
    std::vector<ItemId> items_;
    std::string name_;
};

struct RemoteModelOptions {
    std::string endpoint;       // http://host[:port]/path
    std::chrono::milliseconds timeout{5000};
    int max_retries = 2;        // attempts after the first
    std::size_t batch_size = 128;
    std::size_t max_in_flight = 4;
    std::optional<std::string> bearer_token;
    std::chrono::milliseconds initial_backoff{100};
};

/// Client for the batch prediction protocol:
///   POST {"queries": [[id, ...], ...], "k": k}
///   200  {"predictions": [[{"item_id": id, "score": x?}, ...], ...]}
/// Responses are sanitized; stripped items are counted in sanitized_items().
/// Throws RemoteError on transport failure after retries, a
/// non-200 status, malformed JSON, or a list count different from the
/// query count.
class RemoteModel : public RecModel {
public:
    explicit RemoteModel(RemoteModelOptions options, std::string name = "remote");
    ~RemoteModel() override;

    std::string name() const override { return name_; }
    std::vector<PredictionList> predict(const std::vector<Query>& queries, std::size_t k) const override;
    bool deterministic() const override { return false; }

    std::size_t sanitized_items() const override { return violations_.load(); }
    std::size_t requests() const { return requests_.load(); }

private:
    std::vector<PredictionList> predict_batch(const std::vector<Query>& batch, std::size_t k) const;

    RemoteModelOptions options_;
    std::string name_;
    std::string scheme_host_port_;
    std::string path_;
    mutable std::atomic<std::size_t> violations_{0};
    mutable std::atomic<std::size_t> requests_{0};
};

/// Joins a query's items into a map key.
std::string query_key(const Query& query);

} // namespace reccheck
