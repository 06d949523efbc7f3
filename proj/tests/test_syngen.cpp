// SPDX-License-Identifier: Apache-2.0
#include "reccheck/error.hpp"
#include "reccheck/models.hpp"
#include "reccheck/syngen.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace reccheck;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("zipf sampler is heavy-headed") {
    ZipfSampler zipf(1000, 1.1);
    Rng rng(1);
    std::vector<std::size_t> counts(1000);
    for (int i = 0; i < 100'000; ++i) ++counts[zipf(rng)];
    auto sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    const double median = (sorted[499] + sorted[500]) / 2.0;
    CHECK(counts[0] > 50 * median);
    CHECK(counts[0] == sorted.back());
}

TEST_CASE("same seed, byte-identical files") {
    SynSpec spec;
    spec.n_sessions = 200;
    const auto dir = std::filesystem::temp_directory_path() / "reccheck_syngen_test";
    std::filesystem::remove_all(dir);
    write_syndata(generate(spec), dir / "a");
    write_syndata(generate(spec), dir / "b");
    for (const char* f : {"interactions.jsonl", "catalog.jsonl", "manifest.json"}) {
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        CHECK_FALSE(slurp(dir / "a" / f).empty());
    }
    spec.seed = 7;
    write_syndata(generate(spec), dir / "c");
    CHECK(slurp(dir / "a" / "interactions.jsonl") != slurp(dir / "c" / "interactions.jsonl"));
    // files load back through the normal readers
    const auto rows = load_interactions(dir / "a" / "interactions.jsonl", FileFormat::jsonl);
    CHECK(rows == generate(SynSpec{.n_sessions = 200}).interactions);
    CHECK(load_catalog(dir / "a" / "catalog.jsonl", FileFormat::jsonl).size() == 100);
    std::filesystem::remove_all(dir);
}

TEST_CASE("noise 0 keeps sessions inside one cluster") {
    SynSpec spec;
    spec.cross_cluster_noise = 0.0;
    spec.n_sessions = 1000;
    const auto data = generate(spec);
    for (const auto& s : sessionize(data.interactions)) {
        const auto c = data.manifest.at(s.items.front()).cluster;
        for (const auto& i : s.items) CHECK(data.manifest.at(i).cluster == c);
        CHECK(s.items.size() >= spec.session_len_min);
        CHECK(s.items.size() <= spec.session_len_max);
    }
    // co-occurrence top-1 stays in cluster
    const auto train = sessionize(data.interactions);
    CooccurrenceModel model(train);
    std::size_t good = 0;
    std::vector<Query> probes;
    for (const auto& [id, p] : data.manifest) probes.push_back({id});
    const auto lists = model.predict(probes, 1);
    for (std::size_t i = 0; i < probes.size(); ++i)
        if (!lists[i].empty() && data.manifest.at(lists[i].items[0]).cluster == data.manifest.at(probes[i][0]).cluster)
            ++good;
    CHECK(good == probes.size());
}

TEST_CASE("manifest matches the catalog") {
    for (auto preset : {SynPreset::clustered, SynPreset::zipf}) {
        SynSpec spec;
        spec.preset = preset;
        spec.n_sessions = 500;
        const auto data = generate(spec);
        const auto catalog = data.build_catalog();
        for (const auto& row : data.interactions) CHECK(catalog.find(row.item_id) != nullptr);
        CHECK(data.manifest.size() == catalog.size());
        for (const auto& [id, planted] : data.manifest) {
            const auto* meta = catalog.find(id);
            REQUIRE(meta);
            CHECK(meta->brand == planted.brand);
            CHECK(meta->category_path == planted.category_path);
            CHECK(meta->price == planted.price);
            CHECK(planted.price >= 10.0);
            CHECK(planted.price <= 1000.0);
        }
    }
}

TEST_CASE("invalid specs") {
    SynSpec spec;
    spec.session_len_max = 30; // exceeds cluster size 20
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec = {};
    spec.cross_cluster_noise = 1.5;
    CHECK_THROWS_AS(generate(spec), ConfigError);
}
