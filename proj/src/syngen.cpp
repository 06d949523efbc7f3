// SPDX-License-Identifier: Apache-2.0
#include "reccheck/syngen.hpp"

#include "reccheck/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

namespace reccheck {

using nlohmann::json;

void SynSpec::validate() const {
    if (n_clusters == 0) throw ConfigError("syngen: n_clusters must be positive");
    if (n_sessions == 0) throw ConfigError("syngen: n_sessions must be positive");
    if (session_len_min < 2) throw ConfigError("syngen: sessions need at least 2 items");
    if (session_len_max < session_len_min) throw ConfigError("syngen: session_len_max < session_len_min");
    if (!(cross_cluster_noise >= 0.0 && cross_cluster_noise < 1.0))
        throw ConfigError("syngen: cross_cluster_noise must lie in [0, 1)");
    if (preset == SynPreset::clustered) {
        if (items_per_cluster == 0) throw ConfigError("syngen: items_per_cluster must be positive");
        if (session_len_max > items_per_cluster)
            throw ConfigError("syngen: session_len_max " + std::to_string(session_len_max) +
                              " exceeds the cluster size " + std::to_string(items_per_cluster));
    } else {
        if (zipf_items == 0) throw ConfigError("syngen: zipf_items must be positive");
        if (!(zipf_exponent > 0.0)) throw ConfigError("syngen: zipf_exponent must be positive");
        if (session_len_max > zipf_items) throw ConfigError("syngen: session_len_max exceeds the item count");
    }
}

ZipfSampler::ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        total += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
        cdf_[r] = total;
    }
    for (auto& c : cdf_) c /= total;
    cdf_.back() = 1.0;
}

std::size_t ZipfSampler::operator()(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

namespace {

constexpr std::int64_t kEpochMs = 1'600'000'000'000;
constexpr std::int64_t kSessionSpacingMs = 3'600'000;
constexpr std::int64_t kEventSpacingMs = 60'000;

std::string padded(const char* prefix, std::size_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, value);
    return buf;
}

PlantedItem plant(std::size_t cluster, Rng& rng) {
    PlantedItem p;
    p.cluster = cluster;
    p.brand = "brand_" + std::to_string(cluster);
    p.category_path = {"group_" + std::to_string(cluster / 2), "cat_" + std::to_string(cluster)};
    const double price = std::exp(rng.uniform(std::log(10.0), std::log(1000.0)));
    p.price = std::round(price * 100.0) / 100.0;
    return p;
}

} // namespace

SynData generate(const SynSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SynData data;

    std::vector<ItemId> ids;
    std::vector<std::vector<std::size_t>> members(spec.n_clusters);
    const std::size_t n_items =
        spec.preset == SynPreset::clustered ? spec.n_clusters * spec.items_per_cluster : spec.zipf_items;
    for (std::size_t i = 0; i < n_items; ++i) {
        const std::size_t cluster =
            spec.preset == SynPreset::clustered ? i / spec.items_per_cluster : i % spec.n_clusters;
        ids.push_back(padded(spec.preset == SynPreset::clustered ? "item_" : "z", i, 4));
        members[cluster].push_back(i);
        auto planted = plant(cluster, rng);
        data.catalog.push_back(ItemMeta{ids.back(), planted.price, planted.brand, planted.category_path, {}});
        data.manifest.emplace(ids.back(), std::move(planted));
    }

    const ZipfSampler zipf(spec.preset == SynPreset::zipf ? n_items : 1, spec.zipf_exponent);

    for (std::size_t s = 0; s < spec.n_sessions; ++s) {
        const std::string sid = padded("s", s, 5);
        const std::size_t len =
            spec.session_len_min + rng.below(spec.session_len_max - spec.session_len_min + 1);
        const std::size_t home = rng.below(spec.n_clusters);
        std::unordered_set<std::size_t> used;
        for (std::size_t pos = 0; pos < len; ++pos) {
            std::size_t item = 0;
            for (int attempt = 0;; ++attempt) {
                if (spec.preset == SynPreset::clustered) {
                    std::size_t cluster = home;
                    if (spec.n_clusters > 1 && rng.bernoulli(spec.cross_cluster_noise))
                        cluster = (home + 1 + rng.below(spec.n_clusters - 1)) % spec.n_clusters;
                    const auto& pool = members[cluster];
                    item = pool[rng.below(pool.size())];
                } else {
                    item = zipf(rng);
                }
                // Extremely skewed Zipf draws may keep hitting the same head
                // items; give up on distinctness rather than loop forever.
                if (!used.count(item) || attempt >= 1000) break;
            }
            used.insert(item);
            data.interactions.push_back(Interaction{sid, ids[item],
                                                    kEpochMs + static_cast<std::int64_t>(s) * kSessionSpacingMs +
                                                        static_cast<std::int64_t>(pos) * kEventSpacingMs,
                                                    EventType::view});
        }
    }
    return data;
}

Catalog SynData::build_catalog() const {
    Catalog c;
    for (const auto& meta : catalog) c.add(meta);
    return c;
}

std::string interactions_jsonl(const std::vector<Interaction>& rows) {
    std::string out;
    for (const auto& r : rows) {
        out += json{{"session_id", r.session_id},
                    {"item_id", r.item_id},
                    {"timestamp", r.timestamp},
                    {"event_type", to_string(r.event_type)}}
                   .dump();
        out += '\n';
    }
    return out;
}

std::string catalog_jsonl(const std::vector<ItemMeta>& rows) {
    std::string out;
    for (const auto& m : rows) {
        json row = {{"item_id", m.item_id}};
        if (m.price) row["price"] = *m.price;
        if (m.brand) row["brand"] = *m.brand;
        if (!m.category_path.empty()) row["category_path"] = join_category_path(m.category_path);
        if (!m.extra.empty()) row["extra"] = m.extra;
        out += row.dump();
        out += '\n';
    }
    return out;
}

std::string manifest_json(const std::map<ItemId, PlantedItem>& manifest) {
    json out = json::object();
    for (const auto& [id, p] : manifest)
        out[id] = {{"cluster", p.cluster},
                   {"brand", p.brand},
                   {"category_path", join_category_path(p.category_path)},
                   {"price", p.price}};
    return out.dump(2) + "\n";
}

void write_syndata(const SynData& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw DataError("cannot write '" + (dir / name).string() + "'");
        out << content;
    };
    write("interactions.jsonl", interactions_jsonl(data.interactions));
    write("catalog.jsonl", catalog_jsonl(data.catalog));
    write("manifest.json", manifest_json(data.manifest));
}

} // namespace reccheck
