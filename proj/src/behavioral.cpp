// SPDX-License-Identifier: Apache-2.0
#include "reccheck/behavioral.hpp"

#include "reccheck/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace reccheck {

namespace {

using TokenOf = std::function<std::optional<Token>(const ItemId&)>;

std::vector<HistogramBin> make_histogram(const std::vector<double>& values, std::size_t bins) {
    std::vector<HistogramBin> hist(bins);
    const double width = 2.0 / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        hist[b].low = 2.0 * static_cast<double>(b) / static_cast<double>(bins);
        hist[b].high = 2.0 * static_cast<double>(b + 1) / static_cast<double>(bins);
    }
    for (double v : values) {
        auto b = static_cast<std::size_t>(std::floor(v / width));
        b = std::min(b, bins - 1);
        // Keep each value inside its bin's printed edges despite rounding.
        while (b > 0 && v < hist[b].low) --b;
        while (b + 1 < bins && v >= hist[b + 1].low) ++b;
        hist[b].count += 1;
    }
    return hist;
}

std::optional<double> mean_of(const std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

DistanceReport distance_report(std::string name, std::span<const EvalPair> pairs, const EmbeddingSpace& space,
                               const TokenOf& token_of, const DistanceOptions& options) {
    if (space.empty()) throw ConfigError(name + ": embedding space is empty");
    if (options.bins == 0) throw ConfigError(name + ": bins must be positive");
    if (options.miss_depth == 0) throw ConfigError(name + ": miss_depth must be positive");

    DistanceReport report;
    report.name = std::move(name);
    std::vector<double> to_label;
    std::vector<double> to_pred;
    auto skip = [&](const char* reason) {
        ++report.n_skipped;
        ++report.skips[reason];
    };

    for (const auto& pair : pairs) {
        if (pair.skipped()) {
            skip("empty_prediction");
            continue;
        }
        if (options.scope == DistanceScope::misses_only && hit_rank(pair, options.miss_depth)) {
            skip("hit_excluded");
            continue;
        }
        std::vector<Token> query_tokens;
        for (const auto& item : pair.test_case.query)
            if (auto tok = token_of(item)) query_tokens.push_back(std::move(*tok));
        const auto label_tok = token_of(pair.test_case.primary());
        const auto pred_tok = token_of(pair.prediction.items.front());
        if (query_tokens.empty() || !label_tok || !pred_tok) {
            skip("unmapped_item");
            continue;
        }
        const auto query_vec = mean_vector(space, query_tokens);
        if (query_vec.empty() || !space.contains(*label_tok) || !space.contains(*pred_tok)) {
            skip("out_of_vocab");
            continue;
        }
        if (std::all_of(query_vec.begin(), query_vec.end(), [](double x) { return x == 0.0; })) {
            skip("zero_query_vector");
            continue;
        }
        to_label.push_back(cosine_distance(query_vec, space.vector(*label_tok)));
        to_pred.push_back(cosine_distance(query_vec, space.vector(*pred_tok)));
        ++report.n_cases;
    }
    report.mean_query_to_label = mean_of(to_label);
    report.mean_query_to_pred = mean_of(to_pred);
    report.histogram_label = make_histogram(to_label, options.bins);
    report.histogram_pred = make_histogram(to_pred, options.bins);
    return report;
}

} // namespace

DistanceReport less_wrong_distances(std::span<const EvalPair> pairs, const EmbeddingSpace& space,
                                    const DistanceOptions& options) {
    return distance_report("less_wrong", pairs, space,
                           [](const ItemId& item) { return std::optional<Token>(item); }, options);
}

DistanceReport brand_distance(std::span<const EvalPair> pairs, const EmbeddingSpace& brand_space,
                              const Catalog& catalog, const DistanceOptions& options) {
    return distance_report(
        "brand_distance", pairs, brand_space,
        [&](const ItemId& item) -> std::optional<Token> {
            const ItemMeta* meta = catalog.find(item);
            if (!meta) return std::nullopt;
            return meta->brand;
        },
        options);
}

// ---------------------------------------------------------------------------

PathLengthResult taxonomy_path_length(std::span<const EvalPair> pairs, const Catalog& catalog, PathAnchor anchor) {
    PathLengthResult result;
    auto skip = [&](const char* reason) {
        ++result.n_skipped;
        ++result.skips[reason];
    };
    double sum = 0.0;
    for (const auto& pair : pairs) {
        if (pair.skipped()) {
            skip("empty_prediction");
            continue;
        }
        const ItemId& anchor_item =
            anchor == PathAnchor::query_last ? pair.test_case.query.back() : pair.test_case.primary();
        const auto a = catalog.category_node(anchor_item);
        if (!a) {
            skip("anchor_uncategorized");
            continue;
        }
        const auto b = catalog.category_node(pair.prediction.items.front());
        if (!b) {
            skip("prediction_uncategorized");
            continue;
        }
        sum += static_cast<double>(catalog.taxonomy().path_length(*a, *b));
        ++result.n_cases;
    }
    if (result.n_cases) result.mean = sum / static_cast<double>(result.n_cases);
    return result;
}

// ---------------------------------------------------------------------------

StrataReport popularity_strata(std::span<const EvalPair> pairs, const Popularity& popularity, std::size_t k,
                               std::size_t n_buckets, StrataScheme scheme) {
    if (k == 0) throw ConfigError("popularity_strata: k must be at least 1");
    if (n_buckets == 0) throw ConfigError("popularity_strata: n_buckets must be positive");
    if (popularity.empty()) throw ConfigError("popularity_strata: popularity table is empty");

    StrataReport report;
    report.requested_buckets = n_buckets;

    struct Entry {
        std::int64_t count;
        bool hit;
    };
    std::vector<Entry> entries;
    for (const auto& pair : pairs) {
        if (pair.skipped()) {
            ++report.n_skipped;
            continue;
        }
        auto it = popularity.find(pair.test_case.primary());
        entries.push_back(Entry{it == popularity.end() ? 0 : it->second, hit_rank(pair, k).has_value()});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.count < b.count; });

    // Bucket id per entry; non-decreasing along the sorted order.
    std::vector<std::size_t> bucket_of(entries.size());
    const std::size_t n = entries.size();
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start;
        while (end < n && entries[end].count == entries[start].count) ++end;
        std::size_t bucket;
        if (scheme == StrataScheme::quantile) {
            bucket = start * n_buckets / n;
        } else {
            bucket = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(entries[start].count) + 1.0)));
        }
        for (std::size_t i = start; i < end; ++i) bucket_of[i] = bucket;
        start = end;
    }

    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || bucket_of[i] != bucket_of[i - 1]) {
            report.buckets.push_back(StrataBucket{entries[i].count, entries[i].count, std::nullopt, 0});
            hits = 0;
        }
        auto& b = report.buckets.back();
        b.high_count = entries[i].count;
        ++b.n_cases;
        if (entries[i].hit) ++hits;
        b.hr_at_k = static_cast<double>(hits) / static_cast<double>(b.n_cases);
    }
    return report;
}

// ---------------------------------------------------------------------------

SliceReport slice_metrics(std::span<const EvalPair> pairs, std::size_t k, const Partition& partition) {
    if (k == 0) throw ConfigError("slice_metrics: k must be at least 1");
    SliceReport report;
    std::map<std::string, std::vector<EvalPair>> groups;
    for (const auto& pair : pairs) {
        auto key = partition(pair.test_case);
        if (!key) {
            ++report.unsliceable;
            continue;
        }
        groups[*key].push_back(pair);
    }
    for (const auto& [key, members] : groups) {
        const auto hr = hit_rate_at_k(members, k);
        const auto mrr = mrr_at_k(members, k);
        report.slices.emplace(key, SliceStats{hr.value, mrr.value, hr.n_cases, hr.n_skipped});
    }
    return report;
}

Partition brand_of_last_query_item(const Catalog& catalog) {
    return [&catalog](const TestCase& tc) -> std::optional<std::string> {
        const ItemMeta* meta = catalog.find(tc.query.back());
        if (!meta) return std::nullopt;
        return meta->brand;
    };
}

Partition leaf_category_of_last_query_item(const Catalog& catalog) {
    return [&catalog](const TestCase& tc) -> std::optional<std::string> {
        const ItemMeta* meta = catalog.find(tc.query.back());
        if (!meta || meta->category_path.empty()) return std::nullopt;
        return join_category_path(meta->category_path);
    };
}

Partition cold_start(const Popularity& popularity) {
    return [&popularity](const TestCase& tc) -> std::optional<std::string> {
        auto it = popularity.find(tc.primary());
        return (it == popularity.end() || it->second == 0) ? "cold" : "warm";
    };
}

// ---------------------------------------------------------------------------

AsymmetryResult asymmetry_directional(const RecModel& model, const std::vector<ItemId>& probe_items, std::size_t k) {
    if (k == 0) throw ConfigError("asymmetry_directional: k must be at least 1");
    AsymmetryResult result;
    std::vector<ItemId> probes;
    std::unordered_set<ItemId> seen;
    for (const auto& p : probe_items)
        if (seen.insert(p).second) probes.push_back(p);
    if (probes.empty()) return result;

    auto top_k = [k](const PredictionList& list) {
        return std::vector<ItemId>(list.items.begin(),
                                   list.items.begin() + static_cast<std::ptrdiff_t>(std::min(k, list.items.size())));
    };

    std::vector<Query> forward_queries;
    for (const auto& p : probes) forward_queries.push_back(Query{p});
    const auto forward = model.predict(forward_queries, k);
    if (forward.size() != probes.size()) throw ContractViolation("model returned misaligned predictions");

    std::vector<ItemId> targets;
    std::unordered_map<ItemId, std::size_t> target_index;
    for (const auto& list : forward)
        for (const auto& b : top_k(list))
            if (target_index.emplace(b, targets.size()).second) targets.push_back(b);

    std::vector<Query> backward_queries;
    for (const auto& b : targets) backward_queries.push_back(Query{b});
    const auto backward = backward_queries.empty() ? std::vector<PredictionList>{}
                                                   : model.predict(backward_queries, k);
    if (backward.size() != targets.size()) throw ContractViolation("model returned misaligned predictions");

    std::size_t reciprocal = 0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        for (const auto& b : top_k(forward[i])) {
            ++result.n_pairs;
            const auto back = top_k(backward[target_index.at(b)]);
            if (std::find(back.begin(), back.end(), probes[i]) != back.end()) ++reciprocal;
        }
    }
    if (result.n_pairs) result.score = static_cast<double>(reciprocal) / static_cast<double>(result.n_pairs);
    return result;
}

PriceAsymmetryResult price_asymmetry(std::span<const EvalPair> pairs, const Catalog& catalog, std::size_t k) {
    if (k == 0) throw ConfigError("price_asymmetry: k must be at least 1");
    PriceAsymmetryResult result;
    auto skip = [&](const char* reason) {
        ++result.n_skipped;
        ++result.skips[reason];
    };
    auto price_of = [&](const ItemId& item) -> std::optional<double> {
        const ItemMeta* meta = catalog.find(item);
        return meta ? meta->price : std::nullopt;
    };

    std::size_t cheaper = 0;
    double log_ratio_sum = 0.0;
    std::size_t ratio_terms = 0;
    for (const auto& pair : pairs) {
        if (pair.skipped()) {
            skip("empty_prediction");
            continue;
        }
        std::optional<double> anchor;
        for (const auto& q : pair.test_case.query)
            if (auto p = price_of(q); p && (!anchor || *p > *anchor)) anchor = p;
        if (!anchor) {
            skip("unpriced_query");
            continue;
        }
        ++result.n_cases;
        const auto limit = std::min(k, pair.prediction.items.size());
        for (std::size_t i = 0; i < limit; ++i) {
            const auto p = price_of(pair.prediction.items[i]);
            if (!p) continue;
            ++result.n;
            if (*p < *anchor) ++cheaper;
            // A zero price has no finite log ratio; it still counts above.
            if (*p > 0.0 && *anchor > 0.0) {
                log_ratio_sum += std::log(*p / *anchor);
                ++ratio_terms;
            }
        }
    }
    if (result.n) result.frac_cheaper = static_cast<double>(cheaper) / static_cast<double>(result.n);
    if (ratio_terms) result.mean_price_ratio = std::exp(log_ratio_sum / static_cast<double>(ratio_terms));
    return result;
}

} // namespace reccheck
