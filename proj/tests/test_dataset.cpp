// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "reccheck/error.hpp"

#include <doctest.h>

#include <set>

using namespace reccheck;
using testsupport::session;

namespace {

Interaction ix(std::string sid, std::string item, std::int64_t ts) {
    return Interaction{std::move(sid), std::move(item), ts, EventType::view};
}

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("load_interactions: empty input gives no rows") {
    CHECK(parse_interactions("", FileFormat::jsonl).empty());
    CHECK(parse_interactions("", FileFormat::csv).empty());
}

TEST_CASE("load_interactions: rows come back in file order") {
    const std::string text = R"({"session_id":"s1","item_id":"b","timestamp":5}
{"session_id":"s1","item_id":"a","timestamp":1,"event_type":"add"}
{"session_id":"s2","item_id":"c","timestamp":3,"event_type":"purchase"}
)";
    const auto rows = parse_interactions(text, FileFormat::jsonl);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == ix("s1", "b", 5));
    CHECK(rows[1].item_id == "a");
    CHECK(rows[1].event_type == EventType::add);
    CHECK(rows[2].event_type == EventType::purchase);
}

TEST_CASE("load_interactions: csv with columns in any order") {
    const std::string text = "item_id,timestamp,session_id\nx,10,s\ny,20,s\n";
    const auto rows = parse_interactions(text, FileFormat::csv);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1] == ix("s", "y", 20));
}

TEST_CASE("load_interactions: errors name the line") {
    const std::string missing_item = "{\"session_id\":\"s\",\"item_id\":\"a\",\"timestamp\":1}\n"
                                     "{\"session_id\":\"s\",\"timestamp\":2}\n";
    CHECK(error_of([&] { parse_interactions(missing_item, FileFormat::jsonl); }).find("line 2") == 0);
    const std::string negative = "{\"session_id\":\"s\",\"item_id\":\"a\",\"timestamp\":-1}\n";
    CHECK(error_of([&] { parse_interactions(negative, FileFormat::jsonl); }).find("line 1") == 0);
    const std::string csv = "session_id,item_id,timestamp\ns,a,1\ns,,2\n";
    CHECK(error_of([&] { parse_interactions(csv, FileFormat::csv); }).find("line 3") == 0);
    CHECK_THROWS_AS(parse_interactions("{not json}\n", FileFormat::jsonl), DataError);
}

TEST_CASE("sessionize: single session sorted by time") {
    const auto sessions = sessionize({ix("s", "c", 30), ix("s", "a", 10), ix("s", "b", 20)});
    REQUIRE(sessions.size() == 1);
    CHECK(sessions[0].items == std::vector<ItemId>{"a", "b", "c"});
    CHECK(sessions[0].timestamps == std::vector<std::int64_t>{10, 20, 30});
}

TEST_CASE("sessionize: gap splitting") {
    const auto sessions = sessionize({ix("u", "a", 0), ix("u", "b", 10), ix("u", "c", 10'000'000)}, 1'800'000);
    REQUIRE(sessions.size() == 2);
    CHECK(sessions[0].session_id == "u#0");
    CHECK(sessions[0].items == std::vector<ItemId>{"a", "b"});
    CHECK(sessions[1].session_id == "u#1");
    CHECK(sessions[1].items == std::vector<ItemId>{"c"});
}

TEST_CASE("sessionize: interleaved ids") {
    const auto sessions = sessionize({ix("x", "1", 1), ix("y", "2", 2), ix("x", "3", 3), ix("y", "4", 4)});
    REQUIRE(sessions.size() == 2);
    CHECK(sessions[0].session_id == "x");
    CHECK(sessions[0].items == std::vector<ItemId>{"1", "3"});
    CHECK(sessions[1].items == std::vector<ItemId>{"2", "4"});
}

TEST_CASE("sessionize: idempotent on its own output") {
    Rng rng(3);
    for (int round = 0; round < 50; ++round) {
        std::vector<Interaction> rows;
        const auto n = 1 + rng.below(40);
        for (std::size_t i = 0; i < n; ++i)
            rows.push_back(ix("s" + std::to_string(rng.below(6)), "i" + std::to_string(rng.below(10)),
                              static_cast<std::int64_t>(rng.below(100))));
        const auto once = sessionize(rows);
        const auto twice = sessionize(flatten(once));
        CHECK(once == twice);
    }
}

TEST_CASE("load_catalog: taxonomy chain under the root") {
    const auto cat = parse_catalog(R"({"item_id":"a","category_path":"root>shoes>running"})" "\n", FileFormat::jsonl);
    const auto& tax = cat.taxonomy();
    CHECK(tax.size() == 4);
    const auto leaf = cat.category_node("a");
    REQUIRE(leaf);
    CHECK(tax.depth(*leaf) == 3);
    CHECK(tax.label(*leaf) == "running");
    CHECK(tax.label(tax.parent(*leaf)) == "shoes");
    CHECK(tax.parent(tax.parent(tax.parent(*leaf))) == Taxonomy::kRoot);
}

TEST_CASE("load_catalog: shared prefixes share nodes") {
    const std::string text = "item_id,category_path,brand,price,color\n"
                             "a,root>shoes>running,nike,10.5,red\n"
                             "b,root>shoes>trail,,\"1,000\",blue\n";
    // The quoted price above is not a number.
    CHECK_THROWS_AS(parse_catalog(text, FileFormat::csv), DataError);

    const std::string ok = "item_id,category_path,brand,price,color\n"
                           "a,root>shoes>running,nike,10.5,red\n"
                           "b,root>shoes>trail,,,blue\n"
                           "c,,,,\n";
    const auto cat = parse_catalog(ok, FileFormat::csv);
    // distinct prefixes: root, root>shoes, root>shoes>running, root>shoes>trail
    CHECK(cat.taxonomy().size() == 4 + 1);
    CHECK(cat.find("a")->brand == std::optional<std::string>("nike"));
    CHECK(cat.find("a")->price == std::optional<double>(10.5));
    CHECK(cat.find("a")->extra.at("color") == "red");
    CHECK_FALSE(cat.find("b")->brand.has_value());
    CHECK_FALSE(cat.category_node("c").has_value());
}

TEST_CASE("load_catalog: duplicate ids rejected") {
    const std::string text = "{\"item_id\":\"a\"}\n{\"item_id\":\"a\"}\n";
    CHECK(error_of([&] { parse_catalog(text, FileFormat::jsonl); }).find("line 2") == 0);
}

TEST_CASE("temporal_split: fraction") {
    SessionSet sessions;
    for (int i = 0; i < 10; ++i) sessions.push_back(session("s" + std::to_string(i), {"a"}, (i * 7) % 10));
    const auto split = temporal_split(sessions, SplitByFraction{0.25});
    CHECK(split.train.size() == 8);
    REQUIRE(split.test.size() == 2);
    std::set<std::int64_t> test_starts;
    for (const auto& s : split.test) test_starts.insert(s.first_timestamp());
    CHECK(test_starts == std::set<std::int64_t>{8, 9});
}

TEST_CASE("temporal_split: timestamp") {
    SessionSet sessions;
    for (int i = 0; i < 5; ++i) sessions.push_back(session("s" + std::to_string(i), {"a", "b"}, i * 100));
    const auto split = temporal_split(sessions, SplitAtTimestamp{250});
    CHECK(split.train.size() == 3);
    CHECK(split.test.size() == 2);
    CHECK_THROWS_AS(temporal_split(sessions, SplitAtTimestamp{-1}), DataError);
    CHECK_THROWS_AS(temporal_split(sessions, SplitAtTimestamp{0}), DataError);
}

TEST_CASE("temporal_split: partitions random inputs") {
    Rng rng(11);
    for (int round = 0; round < 100; ++round) {
        SessionSet sessions;
        const auto n = 2 + rng.below(30);
        for (std::size_t i = 0; i < n; ++i)
            sessions.push_back(session("s" + std::to_string(i), {"x"}, static_cast<std::int64_t>(rng.below(20))));
        const double f = 0.05 + 0.9 * rng.uniform();
        SplitResult split;
        try {
            split = temporal_split(sessions, SplitByFraction{f});
        } catch (const DataError&) {
            continue; // one side empty
        }
        CHECK(split.train.size() + split.test.size() == n);
        std::set<std::string> ids;
        for (const auto& s : split.train) ids.insert(s.session_id);
        for (const auto& s : split.test) CHECK(ids.insert(s.session_id).second);
        CHECK(ids.size() == n);
        std::int64_t latest_train = 0;
        for (const auto& s : split.train) latest_train = std::max(latest_train, s.first_timestamp());
        for (const auto& s : split.test) CHECK(s.first_timestamp() >= latest_train);
    }
}

TEST_CASE("build_test_cases: examples") {
    auto cases = build_test_cases({session("s", {"a", "b", "c"})}, CaseScheme::next_item);
    REQUIRE(cases.cases.size() == 1);
    CHECK(cases.cases[0] == TestCase{{"a", "b"}, {"c"}});

    cases = build_test_cases({session("s", {"a", "a", "b"})}, CaseScheme::cart_last);
    REQUIRE(cases.cases.size() == 1);
    CHECK(cases.cases[0] == TestCase{{"a"}, {"b"}});

    cases = build_test_cases({session("s", {"a"})}, CaseScheme::next_item);
    CHECK(cases.cases.empty());

    cases = build_test_cases({session("s", {"a", "b", "a"})}, CaseScheme::next_item);
    CHECK(cases.cases.empty());
    CHECK(cases.dropped_overlap == 1);

    cases = build_test_cases({session("s", {"a", "b"})}, CaseScheme::next_item, 2);
    CHECK(cases.cases.empty());
    CHECK(cases.eligible_sessions == 0);
}

TEST_CASE("build_test_cases: fuzzed sessions give valid cases") {
    Rng rng(5);
    SessionSet sessions;
    for (int i = 0; i < 300; ++i) {
        std::vector<ItemId> items;
        const auto n = 1 + rng.below(6);
        for (std::size_t j = 0; j < n; ++j) items.push_back("i" + std::to_string(rng.below(5)));
        sessions.push_back(session("s" + std::to_string(i), items));
    }
    for (auto scheme : {CaseScheme::next_item, CaseScheme::cart_last}) {
        for (std::size_t min_len : {1u, 2u}) {
            const auto built = build_test_cases(sessions, scheme, min_len);
            for (const auto& c : built.cases) {
                CHECK(c.query.size() >= min_len);
                CHECK_FALSE(c.ground_truth.empty());
                for (const auto& g : c.ground_truth)
                    CHECK(std::find(c.query.begin(), c.query.end(), g) == c.query.end());
            }
            CHECK(built.cases.size() + built.dropped_overlap == built.eligible_sessions);
        }
    }
}

TEST_CASE("item_popularity") {
    auto pop = item_popularity({session("1", {"a", "b"}), session("2", {"a"})});
    CHECK(pop == Popularity{{"a", 2}, {"b", 1}});
    CHECK(item_popularity({}).empty());
    CHECK(item_popularity({session("1", {"a", "a"})}) == Popularity{{"a", 2}});
}

TEST_CASE("item_popularity: total equals interaction count") {
    Rng rng(8);
    SessionSet sessions;
    std::int64_t total_rows = 0;
    for (int i = 0; i < 100; ++i) {
        std::vector<ItemId> items;
        const auto n = 1 + rng.below(7);
        for (std::size_t j = 0; j < n; ++j) items.push_back("i" + std::to_string(rng.below(15)));
        total_rows += static_cast<std::int64_t>(n);
        sessions.push_back(session("s" + std::to_string(i), items));
    }
    std::int64_t total = 0;
    for (const auto& [item, c] : item_popularity(sessions)) total += c;
    CHECK(total == total_rows);
}

TEST_CASE("taxonomy: path lengths") {
    Taxonomy tax;
    const auto x = tax.insert({"A", "x"});
    const auto y = tax.insert({"A", "y"});
    const auto z = tax.insert({"B", "y", "z"});
    CHECK(tax.path_length(x, x) == 0);
    CHECK(tax.path_length(x, y) == 2);
    CHECK(tax.path_length(x, z) == 5);
    CHECK(tax.lowest_common_ancestor(x, z) == Taxonomy::kRoot);
    CHECK(tax.label(tax.lowest_common_ancestor(x, y)) == "A");
}
