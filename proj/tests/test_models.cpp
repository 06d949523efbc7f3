// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "reccheck/error.hpp"
#include "reccheck/syngen.hpp"

#include <doctest.h>

using namespace reccheck;
using testsupport::session;

namespace {

std::vector<ItemId> top(const RecModel& model, Query q, std::size_t k) {
    return model.predict({std::move(q)}, k).at(0).items;
}

} // namespace

TEST_CASE("popularity model") {
    const SessionSet train = {session("1", {"a", "b", "c"}), session("2", {"a", "b"}), session("3", {"a"})};
    PopularityModel model(train);
    CHECK(top(model, {"b"}, 2) == std::vector<ItemId>{"a", "c"});
    CHECK(top(model, {"a", "b", "c"}, 2).empty());
    const auto scored = model.predict({{"b"}}, 2).at(0);
    CHECK(scored.scores == std::vector<double>{3.0, 1.0});

    PopularityModel tied({session("1", {"b", "a"}), session("2", {"a", "b"})});
    CHECK(top(tied, {}, 1) == std::vector<ItemId>{"a"});
}

TEST_CASE("co-occurrence model") {
    const SessionSet train = {session("1", {"a", "b"}), session("2", {"a", "b"}), session("3", {"a", "c"})};
    CooccurrenceModel model(train);
    CHECK(top(model, {"a"}, 2) == std::vector<ItemId>{"b", "c"});
    CHECK(model.count("a", "b") == 2);
    CHECK(model.count("b", "a") == 2);
    CHECK(model.count("b", "c") == 0);
    // unseen query item: pure popularity order
    CHECK(top(model, {"zzz"}, 3) == top(PopularityModel(train), {"zzz"}, 3));
}

TEST_CASE("co-occurrence counts are symmetric on random corpora") {
    Rng rng(21);
    SessionSet train;
    for (int s = 0; s < 80; ++s) {
        std::vector<ItemId> items;
        const auto n = 1 + rng.below(6);
        for (std::size_t i = 0; i < n; ++i) items.push_back("i" + std::to_string(rng.below(12)));
        train.push_back(session(std::to_string(s), items));
    }
    CooccurrenceModel model(train);
    for (int a = 0; a < 12; ++a)
        for (int b = 0; b < 12; ++b) {
            const auto ia = "i" + std::to_string(a), ib = "i" + std::to_string(b);
            CHECK(model.count(ia, ib) == model.count(ib, ia));
        }
    // brute-force count for one pair
    std::int64_t want = 0;
    for (const auto& s : train) {
        const bool has3 = std::count(s.items.begin(), s.items.end(), "i3") > 0;
        const bool has5 = std::count(s.items.begin(), s.items.end(), "i5") > 0;
        if (has3 && has5) ++want;
    }
    CHECK(model.count("i3", "i5") == want);
}

TEST_CASE("co-occurrence: directional symmetry when other scores are zero") {
    // Isolated pairs: a's only neighbour is b and vice versa.
    const SessionSet train = {session("1", {"a", "b"}), session("2", {"c", "d"}), session("3", {"c", "d"})};
    CooccurrenceModel model(train);
    CHECK(top(model, {"a"}, 1) == std::vector<ItemId>{"b"});
    CHECK(top(model, {"b"}, 1) == std::vector<ItemId>{"a"});
    CHECK(top(model, {"c"}, 1) == std::vector<ItemId>{"d"});
    CHECK(top(model, {"d"}, 1) == std::vector<ItemId>{"c"});
}

TEST_CASE("p2v model") {
    auto space = std::make_shared<const EmbeddingSpace>(
        2, std::vector<Token>{"a", "b", "c", "d"}, std::vector<double>{1, 0, 0.9, 0.2, 0, 1, -1, 0.1},
        std::vector<std::int64_t>{1, 1, 1, 1});
    Prod2VecModel model(space);
    const auto lists = model.predict({{"a"}, {"zz"}, {"a", "c"}}, 2);
    CHECK(lists[0].items == std::vector<ItemId>{"b", "c"});
    for (std::size_t i = 0; i < lists[0].items.size(); ++i) {
        const auto nn = nearest_neighbors(*space, "a", 2);
        CHECK(lists[0].items[i] == nn[i].token);
        CHECK(lists[0].scores[i] == doctest::Approx(1.0 - nn[i].distance));
    }
    CHECK(lists[1].empty());
    CHECK(lists[2].items.size() == 2);
    CHECK(contract_violations(lists[2], {"a", "c"}, 2).empty());
}

TEST_CASE("p2v on planted clusters keeps same-cluster queries in cluster") {
    SynSpec syn;
    syn.n_sessions = 3000;
    const auto data = generate(syn);
    EmbeddingConfig cfg;
    cfg.seed = 1;
    auto space = std::make_shared<const EmbeddingSpace>(train_skipgram(item_sequences(sessionize(data.interactions)), cfg));
    Prod2VecModel model(space);
    std::size_t good = 0, total = 0;
    for (std::size_t c = 0; c < syn.n_clusters; ++c) {
        for (std::size_t i = 0; i + 1 < syn.items_per_cluster; i += 2) {
            const auto a = data.catalog[c * syn.items_per_cluster + i].item_id;
            const auto b = data.catalog[c * syn.items_per_cluster + i + 1].item_id;
            const auto pred = top(model, {a, b}, 3);
            REQUIRE(pred.size() == 3);
            ++total;
            bool all_same = true;
            for (const auto& p : pred) all_same = all_same && data.manifest.at(p).cluster == c;
            if (all_same) ++good;
        }
    }
    CHECK(good == total);
}

TEST_CASE("oracle and constant models") {
    const std::vector<TestCase> cases = {{{"a"}, {"b"}}, {{"a", "c"}, {"d", "e"}}};
    OracleModel oracle(cases);
    const auto lists = oracle.predict({{"a"}, {"a", "c"}, {"q"}}, 5);
    CHECK(lists[0].items == std::vector<ItemId>{"b"});
    CHECK(lists[1].items.at(0) == "d");
    CHECK(lists[2].empty());

    ConstantModel constant({"x", "y", "z"});
    CHECK(top(constant, {"y"}, 5) == std::vector<ItemId>{"x", "z"});
    CHECK(top(constant, {}, 2) == std::vector<ItemId>{"x", "y"});
    ConstantModel short_list({"z"});
    CHECK(top(short_list, {}, 10).size() == 1);
}

TEST_CASE("contract checks and sanitizing") {
    PredictionList ok{{"a", "b"}, {0.9, 0.5}};
    CHECK(contract_violations(ok, {"q"}, 2).empty());
    CHECK_FALSE(contract_violations(ok, {"q"}, 1).empty());
    CHECK_FALSE(contract_violations(ok, {"a"}, 2).empty());
    CHECK_FALSE(contract_violations(PredictionList{{"a", "a"}, {}}, {}, 5).empty());
    CHECK_FALSE(contract_violations(PredictionList{{"a", "b"}, {0.1, 0.5}}, {}, 5).empty());
    CHECK_FALSE(contract_violations(PredictionList{{"a", "b"}, {0.1}}, {}, 5).empty());

    auto s = sanitize_prediction(PredictionList{{"a", "b", "a", "q", "c"}, {}}, {"q"}, 5);
    CHECK(s.list.items == std::vector<ItemId>{"a", "b", "c"});
    CHECK(s.violations == 2);
    s = sanitize_prediction(PredictionList{{"a", "b", "c"}, {}}, {}, 2);
    CHECK(s.list.items == std::vector<ItemId>{"a", "b"});
    CHECK(s.violations == 1);
    s = sanitize_prediction(PredictionList{{"a", "b", "c"}, {0.9, 0.95, 0.1}}, {}, 5);
    CHECK(s.list.items == std::vector<ItemId>{"a", "c"});
    CHECK(s.list.scores == std::vector<double>{0.9, 0.1});
    CHECK(s.violations == 1);
}

TEST_CASE("models keep the contract on random queries") {
    Rng rng(4);
    SessionSet train;
    for (int s = 0; s < 60; ++s) {
        std::vector<ItemId> items;
        const auto n = 2 + rng.below(5);
        for (std::size_t i = 0; i < n; ++i) items.push_back("i" + std::to_string(rng.below(20)));
        train.push_back(session(std::to_string(s), items));
    }
    PopularityModel pop(train);
    CooccurrenceModel cooc(train);
    EmbeddingConfig cfg;
    cfg.dim = 8;
    cfg.table_size = 1000;
    Prod2VecModel p2v(std::make_shared<const EmbeddingSpace>(train_skipgram(item_sequences(train), cfg)));
    std::vector<Query> queries;
    for (int q = 0; q < 50; ++q) {
        Query query;
        const auto n = 1 + rng.below(4);
        for (std::size_t i = 0; i < n; ++i) query.push_back("i" + std::to_string(rng.below(22)));
        queries.push_back(query);
    }
    for (const RecModel* m : std::initializer_list<const RecModel*>{&pop, &cooc, &p2v}) {
        for (std::size_t k : {1u, 3u, 10u}) {
            const auto lists = m->predict(queries, k);
            REQUIRE(lists.size() == queries.size());
            for (std::size_t i = 0; i < lists.size(); ++i) CHECK(contract_violations(lists[i], queries[i], k).empty());
        }
    }
}
