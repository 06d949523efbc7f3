// SPDX-License-Identifier: Apache-2.0
#include "reccheck/metrics.hpp"

#include "reccheck/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace reccheck {

namespace {

void require_k(std::size_t k) {
    if (k == 0) throw ConfigError("k must be at least 1");
}

std::string label(const char* base, std::size_t k) { return std::string(base) + "@" + std::to_string(k); }

} // namespace

std::optional<std::size_t> hit_rank(const EvalPair& pair, std::size_t k, TargetMatch match) {
    const auto& items = pair.prediction.items;
    const auto& truth = pair.test_case.ground_truth;
    const std::size_t limit = std::min(k, items.size());
    for (std::size_t r = 0; r < limit; ++r) {
        const bool hit = match == TargetMatch::primary
                             ? items[r] == truth.front()
                             : std::find(truth.begin(), truth.end(), items[r]) != truth.end();
        if (hit) return r + 1;
    }
    return std::nullopt;
}

MetricResult hit_rate_at_k(std::span<const EvalPair> pairs, std::size_t k, TargetMatch match) {
    require_k(k);
    MetricResult r{label("hit_rate", k), k, std::nullopt, 0, 0};
    std::size_t hits = 0;
    for (const auto& p : pairs) {
        if (p.skipped()) {
            ++r.n_skipped;
            continue;
        }
        ++r.n_cases;
        if (hit_rank(p, k, match)) ++hits;
    }
    if (r.n_cases) r.value = static_cast<double>(hits) / static_cast<double>(r.n_cases);
    return r;
}

MetricResult mrr_at_k(std::span<const EvalPair> pairs, std::size_t k, TargetMatch match) {
    require_k(k);
    MetricResult r{label("mrr", k), k, std::nullopt, 0, 0};
    double sum = 0.0;
    for (const auto& p : pairs) {
        if (p.skipped()) {
            ++r.n_skipped;
            continue;
        }
        ++r.n_cases;
        if (auto rank = hit_rank(p, k, match)) sum += 1.0 / static_cast<double>(*rank);
    }
    if (r.n_cases) r.value = sum / static_cast<double>(r.n_cases);
    return r;
}

MetricResult coverage_at_k(std::span<const EvalPair> pairs, std::size_t k, std::size_t catalog_size) {
    require_k(k);
    if (catalog_size == 0) throw ConfigError("coverage needs a non-empty catalog");
    MetricResult r{label("coverage", k), k, std::nullopt, 0, 0};
    std::unordered_set<ItemId> seen;
    for (const auto& p : pairs) {
        if (p.skipped()) {
            ++r.n_skipped;
            continue;
        }
        ++r.n_cases;
        const auto limit = std::min(k, p.prediction.items.size());
        for (std::size_t i = 0; i < limit; ++i) seen.insert(p.prediction.items[i]);
    }
    r.value = static_cast<double>(seen.size()) / static_cast<double>(catalog_size);
    return r;
}

MetricResult popularity_bias_at_k(std::span<const EvalPair> pairs, std::size_t k, const Popularity& popularity) {
    require_k(k);
    std::int64_t total = 0;
    for (const auto& [item, c] : popularity) total += c;
    if (total <= 0) throw ConfigError("popularity bias needs a non-empty training popularity table");
    MetricResult r{label("popularity_bias", k), k, std::nullopt, 0, 0};
    // Sum integer counts, divide once: keeps the value exact up to one rounding.
    std::int64_t count_sum = 0;
    std::size_t slots = 0;
    for (const auto& p : pairs) {
        if (p.skipped()) {
            ++r.n_skipped;
            continue;
        }
        ++r.n_cases;
        const auto limit = std::min(k, p.prediction.items.size());
        for (std::size_t i = 0; i < limit; ++i) {
            auto it = popularity.find(p.prediction.items[i]);
            if (it != popularity.end()) count_sum += it->second;
            ++slots;
        }
    }
    if (slots)
        r.value = static_cast<double>(count_sum) / (static_cast<double>(total) * static_cast<double>(slots));
    return r;
}

} // namespace reccheck
