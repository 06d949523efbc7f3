// SPDX-License-Identifier: Apache-2.0
#include "reccheck/harness.hpp"

#include "reccheck/behavioral.hpp"
#include "reccheck/error.hpp"
#include "reccheck/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace reccheck {

using nlohmann::json;

const std::vector<std::string>& available_tests() {
    static const std::vector<std::string> tests = {
        "hit_rate",     "mrr",          "coverage",       "popularity_bias",  "less_wrong",
        "brand_distance", "path_length", "popularity_strata", "slice_brand",  "slice_category",
        "slice_cold_start", "asymmetry", "price_asymmetry",
    };
    return tests;
}

std::vector<TestDescriptor> parse_test_list(std::string_view list) {
    std::vector<TestDescriptor> out;
    if (list == "all") {
        for (const auto& t : available_tests()) out.push_back(TestDescriptor{t, t, json::object()});
        return out;
    }
    std::set<std::string> seen;
    std::size_t start = 0;
    while (start <= list.size()) {
        auto end = list.find(',', start);
        if (end == std::string_view::npos) end = list.size();
        std::string name(list.substr(start, end - start));
        name.erase(0, name.find_first_not_of(" \t"));
        name.erase(name.find_last_not_of(" \t") + 1);
        start = end + 1;
        if (name.empty()) continue;
        if (std::find(available_tests().begin(), available_tests().end(), name) == available_tests().end())
            throw ConfigError("unknown test '" + name + "'");
        if (!seen.insert(name).second) throw ConfigError("test '" + name + "' listed twice");
        out.push_back(TestDescriptor{name, name, json::object()});
    }
    if (out.empty()) throw ConfigError("no tests requested");
    return out;
}

CaseScheme case_scheme_for(Task task) {
    return task == Task::complementary_items ? CaseScheme::cart_last : CaseScheme::next_item;
}

namespace {

// Parsed parameters of one descriptor; unknown keys are errors.
struct TestParams {
    std::size_t k = 0;
    DistanceOptions distance;
    PathAnchor anchor = PathAnchor::query_last;
    std::size_t n_buckets = 10;
    StrataScheme strata_scheme = StrataScheme::quantile;
    std::size_t probes = 100;
};

std::size_t positive_param(const TestDescriptor& t, const char* key, std::size_t fallback) {
    auto it = t.params.find(key);
    if (it == t.params.end()) return fallback;
    if (!it->is_number_integer() || it->get<std::int64_t>() <= 0)
        throw ConfigError("test '" + t.name + "': parameter '" + key + "' must be a positive integer");
    return it->get<std::size_t>();
}

std::string choice_param(const TestDescriptor& t, const char* key, std::string fallback,
                         const std::vector<std::string>& allowed) {
    auto it = t.params.find(key);
    if (it == t.params.end()) return fallback;
    if (!it->is_string() || std::find(allowed.begin(), allowed.end(), it->get<std::string>()) == allowed.end())
        throw ConfigError("test '" + t.name + "': parameter '" + key + "' has an invalid value");
    return it->get<std::string>();
}

TestParams parse_params(const TestDescriptor& t, std::size_t default_k) {
    static const std::unordered_map<std::string, std::set<std::string>> accepted = {
        {"hit_rate", {"k"}},
        {"mrr", {"k"}},
        {"coverage", {"k"}},
        {"popularity_bias", {"k"}},
        {"less_wrong", {"scope", "bins", "miss_depth"}},
        {"brand_distance", {"scope", "bins", "miss_depth"}},
        {"path_length", {"anchor"}},
        {"popularity_strata", {"k", "n_buckets", "scheme"}},
        {"slice_brand", {"k"}},
        {"slice_category", {"k"}},
        {"slice_cold_start", {"k"}},
        {"asymmetry", {"k", "probes"}},
        {"price_asymmetry", {"k"}},
    };
    auto kind = accepted.find(t.kind);
    if (kind == accepted.end()) throw ConfigError("test '" + t.name + "': unknown kind '" + t.kind + "'");
    if (!t.params.is_object()) throw ConfigError("test '" + t.name + "': params must be an object");
    for (const auto& [key, value] : t.params.items())
        if (!kind->second.count(key)) throw ConfigError("test '" + t.name + "': unknown parameter '" + key + "'");

    TestParams p;
    p.k = positive_param(t, "k", default_k);
    p.distance.scope =
        choice_param(t, "scope", "misses_only", {"misses_only", "all"}) == "all" ? DistanceScope::all
                                                                                 : DistanceScope::misses_only;
    p.distance.bins = positive_param(t, "bins", 20);
    p.distance.miss_depth = positive_param(t, "miss_depth", 1);
    p.anchor = choice_param(t, "anchor", "query_last", {"query_last", "label"}) == "label" ? PathAnchor::label
                                                                                          : PathAnchor::query_last;
    p.n_buckets = positive_param(t, "n_buckets", 10);
    p.strata_scheme =
        choice_param(t, "scheme", "quantile", {"quantile", "log"}) == "log" ? StrataScheme::log : StrataScheme::quantile;
    p.probes = positive_param(t, "probes", 100);
    return p;
}

bool uses_brand_space(const SuiteSpec& spec) {
    return std::any_of(spec.tests.begin(), spec.tests.end(),
                       [](const TestDescriptor& t) { return t.kind == "brand_distance"; });
}

EmbeddingConfig effective_embedding(const SuiteSpec& spec) {
    EmbeddingConfig c = spec.embedding;
    c.seed = spec.seed;
    return c;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string random_run_id() {
    std::random_device rd;
    static constexpr char hex[] = "0123456789abcdef";
    std::string id;
    for (int i = 0; i < 16; ++i) id += hex[rd() & 0xf];
    return id;
}

json sessions_json(const SessionSet& sessions) {
    std::vector<const Session*> sorted;
    for (const auto& s : sessions) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(),
              [](const Session* a, const Session* b) { return a->session_id < b->session_id; });
    json out = json::array();
    for (const auto* s : sorted) out.push_back(json::array({s->session_id, s->items, s->timestamps}));
    return out;
}

} // namespace

void check_spec(const SuiteSpec& spec, const Dataset& dataset) {
    std::vector<std::string> problems;
    if (spec.k == 0) problems.push_back("k must be at least 1");
    if (spec.batch_size == 0) problems.push_back("batch_size must be positive");
    if (spec.min_query_len == 0) problems.push_back("min_query_len must be positive");
    if (spec.tests.empty()) problems.push_back("no tests requested");
    try {
        effective_embedding(spec).validate();
    } catch (const ConfigError& e) {
        problems.push_back(e.what());
    }

    std::set<std::string> names;
    for (const auto& t : spec.tests) {
        if (!names.insert(t.name).second) problems.push_back("duplicate test name '" + t.name + "'");
        try {
            parse_params(t, std::max<std::size_t>(spec.k, 1));
        } catch (const ConfigError& e) {
            problems.push_back(e.what());
            continue;
        }
        const auto& kind = t.kind;
        if ((kind == "brand_distance" || kind == "slice_brand") && !dataset.catalog.has_brands())
            problems.push_back("test '" + t.name + "' needs item brands, but the catalog has none");
        if ((kind == "path_length" || kind == "slice_category") && !dataset.catalog.has_categories())
            problems.push_back("test '" + t.name + "' needs category paths, but the catalog has none");
        if (kind == "price_asymmetry" && !dataset.catalog.has_prices())
            problems.push_back("test '" + t.name + "' needs item prices, but the catalog has none");
        if (kind == "coverage" && dataset.catalog.size() == 0)
            problems.push_back("test '" + t.name + "' needs a non-empty catalog");
        if ((kind == "popularity_bias" || kind == "popularity_strata") && dataset.popularity.empty())
            problems.push_back("test '" + t.name + "' needs training interactions");
    }
    if (!problems.empty()) {
        std::string msg = "unsatisfiable test spec:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
}

Dataset make_dataset(const SessionSet& sessions, Catalog catalog, const SplitRule& rule) {
    auto split = temporal_split(sessions, rule);
    Dataset d;
    d.popularity = item_popularity(split.train);
    d.train = std::move(split.train);
    d.test = std::move(split.test);
    d.catalog = std::move(catalog);
    return d;
}

std::string dataset_fingerprint(const Dataset& dataset) {
    json catalog = json::array();
    for (const auto& [id, meta] : dataset.catalog.items()) {
        catalog.push_back(json::array({id, meta.price ? json(*meta.price) : json(nullptr),
                                       meta.brand ? json(*meta.brand) : json(nullptr), meta.category_path,
                                       meta.extra}));
    }
    const json canonical = {
        {"train", sessions_json(dataset.train)}, {"test", sessions_json(dataset.test)}, {"catalog", catalog}};
    return sha256_hex(canonical.dump());
}

EmbeddingSpace train_item_space(const Dataset& dataset, const EmbeddingConfig& config) {
    return train_skipgram(item_sequences(dataset.train), config);
}

EmbeddingSpace train_brand_space(const Dataset& dataset, const EmbeddingConfig& config) {
    return train_skipgram(feature_sequences(dataset.train, dataset.catalog, ItemFeature::brand), config);
}

RecReport run_suite(const Dataset& dataset, const RecModel& model, const SuiteSpec& spec,
                      const RunOptions& options) {
    check_spec(spec, dataset);

    RecReport report;
    report.run_id = random_run_id();
    report.started_at = utc_now();
    report.model_name = model.name();
    report.spec = spec;
    report.dataset_fingerprint = dataset_fingerprint(dataset);
    report.config_fingerprint =
        sha256_hex(json{{"spec", to_json(spec)}, {"code_version", kCodeVersion}}.dump());
    report.deterministic = model.deterministic() && !options.item_space && !options.brand_space;

    // Test cases.
    const auto built = build_test_cases(dataset.test, case_scheme_for(spec.task), spec.min_query_len);
    const auto& cases = built.cases;
    report.n_test_cases = cases.size();
    report.skip_counters["cases.dropped_overlap"] = built.dropped_overlap;
    report.skip_counters["cases.short_sessions"] = dataset.test.size() - built.eligible_sessions;
    spdlog::info("{} test cases from {} test sessions", cases.size(), dataset.test.size());

    // Embedding spaces.
    const auto emb_config = effective_embedding(spec);
    std::shared_ptr<const EmbeddingSpace> item_space = options.item_space;
    std::optional<std::string> item_space_error;
    if (!item_space) {
        try {
            item_space = std::make_shared<const EmbeddingSpace>(train_item_space(dataset, emb_config));
            spdlog::info("item space: {} tokens, dim {}", item_space->size(), item_space->dim());
        } catch (const Error& e) {
            item_space_error = e.what();
        }
    }
    std::shared_ptr<const EmbeddingSpace> brand_space = options.brand_space;
    std::optional<std::string> brand_space_error;
    if (!brand_space && uses_brand_space(spec)) {
        try {
            brand_space = std::make_shared<const EmbeddingSpace>(train_brand_space(dataset, emb_config));
            spdlog::info("brand space: {} tokens", brand_space->size());
        } catch (const Error& e) {
            brand_space_error = e.what();
        }
    }

    // Predictions, one request per unique query.
    std::size_t k_max = spec.k;
    for (const auto& t : spec.tests) k_max = std::max(k_max, parse_params(t, spec.k).k);

    std::vector<Query> unique_queries;
    std::unordered_map<std::string, std::size_t> query_slot;
    std::vector<std::size_t> case_slot;
    for (const auto& c : cases) {
        auto [it, inserted] = query_slot.try_emplace(query_key(c.query), unique_queries.size());
        if (inserted) unique_queries.push_back(c.query);
        case_slot.push_back(it->second);
    }
    std::vector<PredictionList> answers;
    answers.reserve(unique_queries.size());
    std::size_t calls = 0;
    std::size_t repaired = 0;
    for (std::size_t start = 0; start < unique_queries.size(); start += spec.batch_size) {
        const auto end = std::min(unique_queries.size(), start + spec.batch_size);
        std::vector<Query> batch(unique_queries.begin() + static_cast<std::ptrdiff_t>(start),
                                 unique_queries.begin() + static_cast<std::ptrdiff_t>(end));
        auto lists = model.predict(batch, k_max);
        ++calls;
        if (lists.size() != batch.size())
            throw ContractViolation("model '" + model.name() + "' returned " + std::to_string(lists.size()) +
                                    " lists for " + std::to_string(batch.size()) + " queries");
        for (std::size_t i = 0; i < lists.size(); ++i) {
            auto problems = contract_violations(lists[i], batch[i], k_max);
            if (!problems.empty()) {
                if (model.deterministic())
                    throw ContractViolation("model '" + model.name() + "' broke the prediction contract: " +
                                            problems.front());
                auto clean = sanitize_prediction(std::move(lists[i]), batch[i], k_max);
                repaired += clean.violations;
                lists[i] = std::move(clean.list);
            }
            answers.push_back(std::move(lists[i]));
        }
    }
    spdlog::info("{} prediction calls for {} unique queries", calls, unique_queries.size());

    std::vector<EvalPair> pairs;
    pairs.reserve(cases.size());
    std::size_t empty = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        pairs.push_back(EvalPair{cases[i], answers[case_slot[i]]});
        if (pairs.back().skipped()) ++empty;
    }
    report.skip_counters["predictions.empty"] = empty;
    report.skip_counters["model.sanitized_items"] = model.sanitized_items() + repaired;

    auto record_skips = [&](const std::string& test, const SkipCounts& skips) {
        for (const auto& [reason, n] : skips) report.skip_counters[test + "." + reason] += n;
    };
    auto record_metric = [&](const std::string& test, const MetricResult& m) {
        if (m.n_skipped) report.skip_counters[test + ".empty_prediction"] += m.n_skipped;
        return to_json(m);
    };
    auto need_item_space = [&]() -> const EmbeddingSpace& {
        if (!item_space) throw DataError("item embedding unavailable: " + item_space_error.value_or("unknown"));
        return *item_space;
    };

    // Asymmetry probes: distinct last query items in a seeded order.
    auto probe_items = [&](std::size_t limit) {
        std::set<ItemId> distinct;
        for (const auto& c : cases) distinct.insert(c.query.back());
        std::vector<ItemId> probes(distinct.begin(), distinct.end());
        Rng rng(spec.seed);
        rng.shuffle(probes.begin(), probes.end());
        if (probes.size() > limit) probes.resize(limit);
        return probes;
    };

    for (const auto& test : spec.tests) {
        TestOutcome outcome{test.name, test.kind, nullptr, std::nullopt};
        try {
            const auto p = parse_params(test, spec.k);
            const auto& kind = test.kind;
            if (kind == "hit_rate") {
                outcome.output = record_metric(test.name, hit_rate_at_k(pairs, p.k));
            } else if (kind == "mrr") {
                outcome.output = record_metric(test.name, mrr_at_k(pairs, p.k));
            } else if (kind == "coverage") {
                outcome.output = record_metric(test.name, coverage_at_k(pairs, p.k, dataset.catalog.size()));
            } else if (kind == "popularity_bias") {
                outcome.output = record_metric(test.name, popularity_bias_at_k(pairs, p.k, dataset.popularity));
            } else if (kind == "less_wrong") {
                auto r = less_wrong_distances(pairs, need_item_space(), p.distance);
                record_skips(test.name, r.skips);
                outcome.output = to_json(r);
            } else if (kind == "brand_distance") {
                if (!brand_space)
                    throw DataError("brand embedding unavailable: " + brand_space_error.value_or("unknown"));
                auto r = brand_distance(pairs, *brand_space, dataset.catalog, p.distance);
                record_skips(test.name, r.skips);
                outcome.output = to_json(r);
            } else if (kind == "path_length") {
                auto r = taxonomy_path_length(pairs, dataset.catalog, p.anchor);
                record_skips(test.name, r.skips);
                outcome.output = to_json(r);
            } else if (kind == "popularity_strata") {
                auto r = popularity_strata(pairs, dataset.popularity, p.k, p.n_buckets, p.strata_scheme);
                if (r.n_skipped) report.skip_counters[test.name + ".empty_prediction"] += r.n_skipped;
                outcome.output = to_json(r);
            } else if (kind == "slice_brand" || kind == "slice_category" || kind == "slice_cold_start") {
                const Partition partition = kind == "slice_brand"      ? brand_of_last_query_item(dataset.catalog)
                                            : kind == "slice_category" ? leaf_category_of_last_query_item(dataset.catalog)
                                                                       : cold_start(dataset.popularity);
                auto r = slice_metrics(pairs, p.k, partition);
                if (r.unsliceable) report.skip_counters[test.name + ".unsliceable"] += r.unsliceable;
                std::size_t skipped = 0;
                for (const auto& [key, s] : r.slices) skipped += s.n_skipped;
                if (skipped) report.skip_counters[test.name + ".empty_prediction"] += skipped;
                outcome.output = to_json(r);
            } else if (kind == "asymmetry") {
                outcome.output = to_json(asymmetry_directional(model, probe_items(p.probes), p.k));
            } else if (kind == "price_asymmetry") {
                auto r = price_asymmetry(pairs, dataset.catalog, p.k);
                record_skips(test.name, r.skips);
                outcome.output = to_json(r);
            }
        } catch (const std::exception& e) {
            spdlog::warn("test '{}' failed: {}", test.name, e.what());
            outcome.output = nullptr;
            outcome.error = e.what();
        }
        report.results.push_back(std::move(outcome));
    }

    report.finished_at = utc_now();
    return report;
}

} // namespace reccheck
