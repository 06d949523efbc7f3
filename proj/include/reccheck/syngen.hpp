// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reccheck/dataset.hpp"
#include "reccheck/random.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace reccheck {

enum class SynPreset { clustered, zipf };

/// Synthetic data with planted structure. `items_per_cluster` applies to
/// the clustered preset; the zipf preset spreads `zipf_items` items over
/// the same number of clusters round-robin.
struct SynSpec {
    SynPreset preset = SynPreset::clustered;
    std::size_t n_clusters = 5;
    std::size_t items_per_cluster = 20;
    std::size_t n_sessions = 5000;
    std::size_t session_len_min = 3;
    std::size_t session_len_max = 8;
    double cross_cluster_noise = 0.05;
    double zipf_exponent = 1.1;
    std::size_t zipf_items = 1000;
    std::uint64_t seed = 42;

    /// Throws ConfigError for out-of-range or infeasible values.
    void validate() const;
};

struct PlantedItem {
    std::size_t cluster = 0;
    std::string brand;
    std::vector<std::string> category_path;
    double price = 0.0;
};

struct SynData {
    std::vector<Interaction> interactions;
    std::vector<ItemMeta> catalog;
    std::map<ItemId, PlantedItem> manifest;

    Catalog build_catalog() const;
};

SynData generate(const SynSpec& spec);

/// Writes interactions.jsonl, catalog.jsonl and manifest.json under `dir`.
void write_syndata(const SynData& data, const std::filesystem::path& dir);

std::string interactions_jsonl(const std::vector<Interaction>& rows);
std::string catalog_jsonl(const std::vector<ItemMeta>& rows);
std::string manifest_json(const std::map<ItemId, PlantedItem>& manifest);

/// Draws ranks 0..n-1 with P(r) proportional to 1/(r+1)^exponent by
/// inverse-CDF lookup.
class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double exponent);
    std::size_t operator()(Rng& rng) const;
    std::size_t size() const { return cdf_.size(); }

private:
    std::vector<double> cdf_;
};

} // namespace reccheck
