// SPDX-License-Identifier: Apache-2.0
#include "reccheck/models.hpp"

#include "reccheck/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace reccheck {

std::string query_key(const Query& query) {
    std::string key;
    for (const auto& item : query) {
        key += item;
        key += '\x1f';
    }
    return key;
}

std::vector<std::string> contract_violations(const PredictionList& list, const Query& query, std::size_t k) {
    std::vector<std::string> problems;
    if (list.items.size() > k)
        problems.push_back(std::to_string(list.items.size()) + " items for k=" + std::to_string(k));
    std::unordered_set<ItemId> in_query(query.begin(), query.end());
    std::unordered_set<ItemId> seen;
    for (const auto& item : list.items) {
        if (!seen.insert(item).second) problems.push_back("duplicate item '" + item + "'");
        if (in_query.count(item)) problems.push_back("query item '" + item + "' recommended");
    }
    if (!list.scores.empty()) {
        if (list.scores.size() != list.items.size()) {
            problems.push_back("scores and items differ in length");
        } else {
            for (std::size_t i = 1; i < list.scores.size(); ++i)
                if (list.scores[i] > list.scores[i - 1]) {
                    problems.push_back("scores increase at rank " + std::to_string(i + 1));
                    break;
                }
        }
    }
    return problems;
}

Sanitized sanitize_prediction(PredictionList list, const Query& query, std::size_t k) {
    Sanitized out;
    const bool keep_scores = !list.scores.empty() && list.scores.size() == list.items.size();
    if (!list.scores.empty() && !keep_scores) ++out.violations;

    std::unordered_set<ItemId> in_query(query.begin(), query.end());
    std::unordered_set<ItemId> seen;
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        const auto& item = list.items[i];
        bool ok = !in_query.count(item) && !seen.count(item) && out.list.items.size() < k;
        if (ok && keep_scores && !out.list.scores.empty() && list.scores[i] > out.list.scores.back()) ok = false;
        if (!ok) {
            ++out.violations;
            continue;
        }
        seen.insert(item);
        out.list.items.push_back(item);
        if (keep_scores) out.list.scores.push_back(list.scores[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------

PopularityModel::PopularityModel(const SessionSet& train) {
    if (train.empty()) throw ConfigError("popularity model needs a non-empty training set");
    const auto counts = item_popularity(train);
    ranking_.assign(counts.begin(), counts.end());
    std::sort(ranking_.begin(), ranking_.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
}

std::vector<PredictionList> PopularityModel::predict(const std::vector<Query>& queries, std::size_t k) const {
    std::vector<PredictionList> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        std::unordered_set<ItemId> skip(q.begin(), q.end());
        PredictionList list;
        for (const auto& [item, count] : ranking_) {
            if (list.items.size() >= k) break;
            if (skip.count(item)) continue;
            list.items.push_back(item);
            list.scores.push_back(static_cast<double>(count));
        }
        out.push_back(std::move(list));
    }
    return out;
}

// ---------------------------------------------------------------------------

CooccurrenceModel::CooccurrenceModel(const SessionSet& train) {
    if (train.empty()) throw ConfigError("co-occurrence model needs a non-empty training set");
    const auto pop = item_popularity(train);
    std::vector<std::pair<ItemId, std::int64_t>> ranked(pop.begin(), pop.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (auto& [item, count] : ranked) {
        rank_.emplace(item, items_.size());
        items_.push_back(item);
    }
    counts_.resize(items_.size());
    for (const auto& session : train) {
        std::vector<std::size_t> ids;
        for (const auto& item : session.items) ids.push_back(rank_.at(item));
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                ++counts_[ids[i]][ids[j]];
                ++counts_[ids[j]][ids[i]];
            }
    }
}

std::int64_t CooccurrenceModel::count(const ItemId& a, const ItemId& b) const {
    auto ia = rank_.find(a);
    auto ib = rank_.find(b);
    if (ia == rank_.end() || ib == rank_.end()) return 0;
    auto it = counts_[ia->second].find(ib->second);
    return it == counts_[ia->second].end() ? 0 : it->second;
}

std::vector<PredictionList> CooccurrenceModel::predict(const std::vector<Query>& queries, std::size_t k) const {
    std::vector<PredictionList> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        std::unordered_set<std::size_t> in_query;
        for (const auto& item : q)
            if (auto it = rank_.find(item); it != rank_.end()) in_query.insert(it->second);

        std::unordered_map<std::size_t, std::int64_t> scores;
        for (const auto& item : q) {
            auto it = rank_.find(item);
            if (it == rank_.end()) continue;
            for (const auto& [other, c] : counts_[it->second])
                if (!in_query.count(other)) scores[other] += c;
        }
        std::vector<std::pair<std::size_t, std::int64_t>> scored(scores.begin(), scores.end());
        // Lower rank index means more popular, then lexicographically smaller.
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });

        std::unordered_set<ItemId> query_items(q.begin(), q.end());
        PredictionList list;
        std::unordered_set<std::size_t> taken;
        for (const auto& [idx, score] : scored) {
            if (list.items.size() >= k) break;
            list.items.push_back(items_[idx]);
            list.scores.push_back(static_cast<double>(score));
            taken.insert(idx);
        }
        for (std::size_t idx = 0; idx < items_.size() && list.items.size() < k; ++idx) {
            if (taken.count(idx) || query_items.count(items_[idx])) continue;
            list.items.push_back(items_[idx]);
            list.scores.push_back(0.0);
        }
        out.push_back(std::move(list));
    }
    return out;
}

// ---------------------------------------------------------------------------

Prod2VecModel::Prod2VecModel(std::shared_ptr<const EmbeddingSpace> space) : space_(std::move(space)) {
    if (!space_ || space_->empty()) throw ConfigError("p2v model needs a non-empty embedding space");
}

std::vector<PredictionList> Prod2VecModel::predict(const std::vector<Query>& queries, std::size_t k) const {
    std::vector<PredictionList> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        PredictionList list;
        const auto mean = mean_vector(*space_, q);
        const bool usable = std::any_of(mean.begin(), mean.end(), [](double x) { return x != 0.0; });
        if (usable) {
            for (auto& n : nearest_neighbors(*space_, mean, k, q)) {
                list.items.push_back(std::move(n.token));
                list.scores.push_back(1.0 - n.distance);
            }
        }
        out.push_back(std::move(list));
    }
    return out;
}

// ---------------------------------------------------------------------------

OracleModel::OracleModel(const std::vector<TestCase>& cases) {
    for (const auto& c : cases) answers_.emplace(query_key(c.query), c.primary());
}

std::vector<PredictionList> OracleModel::predict(const std::vector<Query>& queries, std::size_t k) const {
    std::vector<PredictionList> out(queries.size());
    if (k == 0) return out;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        auto it = answers_.find(query_key(queries[i]));
        if (it == answers_.end()) continue;
        out[i].items.push_back(it->second);
        out[i].scores.push_back(1.0);
    }
    return out;
}

ConstantModel::ConstantModel(std::vector<ItemId> items, std::string name)
    : items_(std::move(items)), name_(std::move(name)) {}

std::vector<PredictionList> ConstantModel::predict(const std::vector<Query>& queries, std::size_t k) const {
    std::vector<PredictionList> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        std::unordered_set<ItemId> skip(q.begin(), q.end());
        PredictionList list;
        for (const auto& item : items_) {
            if (list.items.size() >= k) break;
            if (skip.insert(item).second) list.items.push_back(item);
        }
        out.push_back(std::move(list));
    }
    return out;
}

} // namespace reccheck
