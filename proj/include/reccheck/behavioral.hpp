// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reccheck/dataset.hpp"
#include "reccheck/embedding.hpp"
#include "reccheck/metrics.hpp"
#include "reccheck/models.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reccheck {

/// Per-reason skip tallies. Reasons are short snake_case labels.
using SkipCounts = std::map<std::string, std::size_t>;

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;

    bool operator==(const HistogramBin&) const = default;
};

/// Query-to-label and query-to-prediction cosine distances. Both histograms
/// cover [0, 2] with identical edges.
struct DistanceReport {
    std::string name;
    std::optional<double> mean_query_to_label;
    std::optional<double> mean_query_to_pred;
    std::vector<HistogramBin> histogram_label;
    std::vector<HistogramBin> histogram_pred;
    std::size_t n_cases = 0;
    std::size_t n_skipped = 0;
    SkipCounts skips;
};

enum class DistanceScope { misses_only, all };

struct DistanceOptions {
    DistanceScope scope = DistanceScope::misses_only;
    std::size_t bins = 20;
    /// A case is a miss when the primary target is absent from the top
    /// `miss_depth` predictions. Distances always use the top-1 prediction.
    std::size_t miss_depth = 1;
};

DistanceReport less_wrong_distances(std::span<const EvalPair> pairs, const EmbeddingSpace& space,
                                    const DistanceOptions& options = {});

/// Same as less_wrong_distances after mapping every item to its brand token.
DistanceReport brand_distance(std::span<const EvalPair> pairs, const EmbeddingSpace& brand_space,
                              const Catalog& catalog, const DistanceOptions& options = {});

enum class PathAnchor { query_last, label };

struct PathLengthResult {
    std::optional<double> mean;
    std::size_t n_cases = 0;
    std::size_t n_skipped = 0;
    SkipCounts skips;
};

/// Mean tree distance between the anchor item's leaf category and the
/// top-1 prediction's leaf category.
PathLengthResult taxonomy_path_length(std::span<const EvalPair> pairs, const Catalog& catalog,
                                      PathAnchor anchor = PathAnchor::query_last);

struct StrataBucket {
    std::int64_t low_count = 0;  // smallest ground-truth count in the bucket
    std::int64_t high_count = 0; // largest
    std::optional<double> hr_at_k;
    std::size_t n_cases = 0;

    bool operator==(const StrataBucket&) const = default;
};

enum class StrataScheme { quantile, log };

struct StrataReport {
    std::vector<StrataBucket> buckets;
    std::size_t requested_buckets = 0;
    std::size_t n_skipped = 0;
};

/// Hit rate by popularity of the primary ground truth. Quantile buckets keep
/// equal counts together, so fewer buckets than requested may come back.
/// The log scheme buckets by floor(log2(count + 1)) and ignores n_buckets.
StrataReport popularity_strata(std::span<const EvalPair> pairs, const Popularity& popularity, std::size_t k,
                               std::size_t n_buckets = 10, StrataScheme scheme = StrataScheme::quantile);

struct SliceStats {
    std::optional<double> hr_at_k;
    std::optional<double> mrr_at_k;
    std::size_t n_cases = 0;
    std::size_t n_skipped = 0;

    bool operator==(const SliceStats&) const = default;
};

struct SliceReport {
    std::map<std::string, SliceStats> slices;
    std::size_t unsliceable = 0;
};

using Partition = std::function<std::optional<std::string>(const TestCase&)>;

SliceReport slice_metrics(std::span<const EvalPair> pairs, std::size_t k, const Partition& partition);

Partition brand_of_last_query_item(const Catalog& catalog);
Partition leaf_category_of_last_query_item(const Catalog& catalog);
/// "cold" when the primary ground truth never occurs in training, else "warm".
Partition cold_start(const Popularity& popularity);

struct AsymmetryResult {
    std::optional<double> score;
    std::size_t n_pairs = 0;
};

/// Fraction of (a, b) pairs, b in top-k(a), for which a is in top-k(b).
AsymmetryResult asymmetry_directional(const RecModel& model, const std::vector<ItemId>& probe_items,
                                      std::size_t k);

struct PriceAsymmetryResult {
    std::optional<double> frac_cheaper;
    std::optional<double> mean_price_ratio; // geometric mean
    std::size_t n = 0;                      // priced predictions compared
    std::size_t n_cases = 0;
    std::size_t n_skipped = 0;
    SkipCounts skips;
};

/// Compares top-k predicted prices with the most expensive priced query item.
PriceAsymmetryResult price_asymmetry(std::span<const EvalPair> pairs, const Catalog& catalog, std::size_t k);

} // namespace reccheck
