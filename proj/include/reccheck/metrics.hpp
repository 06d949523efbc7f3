// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reccheck/dataset.hpp"
#include "reccheck/models.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace reccheck {

/// A test case aligned with the model's answer for its query. An empty
/// prediction is a skip, not a miss.
struct EvalPair {
    TestCase test_case;
    PredictionList prediction;

    bool skipped() const { return prediction.empty(); }
};

/// `value` is nullopt when no case was evaluable.
struct MetricResult {
    std::string name;
    std::size_t k = 0;
    std::optional<double> value;
    std::size_t n_cases = 0;
    std::size_t n_skipped = 0;

    bool operator==(const MetricResult&) const = default;
};

/// Which ground-truth items count as a hit.
enum class TargetMatch { primary, any };

/// 1-based rank of the first matching ground-truth item within the top k,
/// or nullopt.
std::optional<std::size_t> hit_rank(const EvalPair& pair, std::size_t k, TargetMatch match = TargetMatch::primary);

MetricResult hit_rate_at_k(std::span<const EvalPair> pairs, std::size_t k,
                           TargetMatch match = TargetMatch::primary);
MetricResult mrr_at_k(std::span<const EvalPair> pairs, std::size_t k, TargetMatch match = TargetMatch::primary);

/// Distinct items in any top-k list divided by the catalog size.
MetricResult coverage_at_k(std::span<const EvalPair> pairs, std::size_t k, std::size_t catalog_size);

/// Mean training-popularity share over every recommended top-k slot. Items
/// unseen in training contribute zero. This is a definition choice: the
/// share is count(item) / total training interactions.
MetricResult popularity_bias_at_k(std::span<const EvalPair> pairs, std::size_t k, const Popularity& popularity);

} // namespace reccheck
