// SPDX-License-Identifier: Apache-2.0
// Fixture builders shared by the unit tests.
#pragma once

#include "reccheck/dataset.hpp"
#include "reccheck/metrics.hpp"
#include "reccheck/models.hpp"
#include "reccheck/random.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace testsupport {

using namespace reccheck;

inline Session session(std::string id, std::vector<ItemId> items, std::int64_t t0 = 0) {
    Session s;
    s.session_id = std::move(id);
    for (std::size_t i = 0; i < items.size(); ++i) s.timestamps.push_back(t0 + static_cast<std::int64_t>(i));
    s.items = std::move(items);
    return s;
}

inline ItemMeta item(ItemId id, std::vector<std::string> path = {}, std::optional<std::string> brand = {},
                     std::optional<double> price = {}) {
    return ItemMeta{std::move(id), price, std::move(brand), std::move(path), {}};
}

inline EvalPair pair(std::vector<ItemId> query, std::vector<ItemId> truth, std::vector<ItemId> pred) {
    return EvalPair{TestCase{std::move(query), std::move(truth)}, PredictionList{std::move(pred), {}}};
}

// Cases whose query occurs exactly once. A query-keyed oracle can only be
// perfect on these.
inline std::vector<TestCase> unique_query_cases(const std::vector<TestCase>& cases) {
    std::map<std::string, std::size_t> seen;
    for (const auto& c : cases) ++seen[query_key(c.query)];
    std::vector<TestCase> out;
    for (const auto& c : cases)
        if (seen[query_key(c.query)] == 1) out.push_back(c);
    return out;
}

inline ItemId fuzz_item(std::size_t i) { return "i" + std::to_string(i); }

// Random valid pairs over a small item pool; about one in ten predictions is empty.
inline std::vector<EvalPair> fuzz_pairs(Rng& rng, std::size_t n, std::size_t pool = 30, std::size_t max_pred = 12) {
    std::vector<EvalPair> out;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::size_t> ids(pool);
        for (std::size_t i = 0; i < pool; ++i) ids[i] = i;
        rng.shuffle(ids.begin(), ids.end());
        std::size_t pos = 0;
        EvalPair p;
        const auto qlen = 1 + rng.below(4);
        for (std::size_t i = 0; i < qlen; ++i) p.test_case.query.push_back(fuzz_item(ids[pos++]));
        const auto tlen = 1 + rng.below(2);
        // Truth items are drawn from the rest of the shuffled pool, so some land in predictions.
        std::vector<ItemId> rest;
        for (std::size_t i = pos; i < pool; ++i) rest.push_back(fuzz_item(ids[i]));
        for (std::size_t i = 0; i < tlen; ++i) p.test_case.ground_truth.push_back(rest[rng.below(rest.size())]);
        p.test_case.ground_truth.erase(std::unique(p.test_case.ground_truth.begin(), p.test_case.ground_truth.end()),
                                       p.test_case.ground_truth.end());
        if (!rng.bernoulli(0.1)) {
            rng.shuffle(rest.begin(), rest.end());
            const auto plen = 1 + rng.below(std::min(max_pred, rest.size()));
            p.prediction.items.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(plen));
        }
        out.push_back(std::move(p));
    }
    return out;
}

// Popularity table over the fuzz pool with some unseen items.
inline Popularity fuzz_popularity(Rng& rng, std::size_t pool = 30) {
    Popularity pop;
    for (std::size_t i = 0; i < pool; ++i)
        if (!rng.bernoulli(0.2)) pop[fuzz_item(i)] = static_cast<std::int64_t>(1 + rng.below(50));
    return pop;
}

} // namespace testsupport
