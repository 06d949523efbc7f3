// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "reccheck/behavioral.hpp"
#include "reccheck/embedding.hpp"
#include "reccheck/metrics.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reccheck {

inline constexpr std::string_view kSchemaVersion = "1";
inline constexpr std::string_view kCodeVersion = "reccheck 0.1.0";

enum class Task { similar_items, complementary_items, session_based };

std::string_view to_string(Task task);
/// Accepts the full names and the CLI short forms (similar, complementary, session).
std::optional<Task> parse_task(std::string_view name);

/// One requested test. `kind` selects the implementation; `name` is the
/// unique label the result is reported under.
struct TestDescriptor {
    std::string name;
    std::string kind;
    nlohmann::json params = nlohmann::json::object();

    bool operator==(const TestDescriptor&) const = default;
};

struct SuiteSpec {
    Task task = Task::complementary_items;
    std::vector<TestDescriptor> tests;
    std::size_t k = 10;
    std::uint64_t seed = 0;
    EmbeddingConfig embedding;
    std::size_t batch_size = 128;
    std::size_t min_query_len = 1;

    bool operator==(const SuiteSpec&) const = default;
};

/// Result of one test: `output` on success, `error` on failure.
struct TestOutcome {
    std::string name;
    std::string kind;
    nlohmann::json output;
    std::optional<std::string> error;

    bool operator==(const TestOutcome&) const = default;
};

struct RecReport {
    std::string schema_version{kSchemaVersion};
    std::string run_id;
    std::string model_name;
    std::string code_version{kCodeVersion};
    std::string dataset_fingerprint;
    std::string config_fingerprint;
    SuiteSpec spec;
    std::string started_at;
    std::string finished_at;
    std::size_t n_test_cases = 0;
    std::vector<TestOutcome> results;
    std::map<std::string, std::uint64_t> skip_counters;
    bool deterministic = true;

    const TestOutcome* find(std::string_view name) const;
    bool operator==(const RecReport&) const = default;
};

nlohmann::json to_json(const MetricResult& r);
nlohmann::json to_json(const DistanceReport& r);
nlohmann::json to_json(const PathLengthResult& r);
nlohmann::json to_json(const StrataReport& r);
nlohmann::json to_json(const SliceReport& r);
nlohmann::json to_json(const AsymmetryResult& r);
nlohmann::json to_json(const PriceAsymmetryResult& r);

nlohmann::json to_json(const EmbeddingConfig& c);
EmbeddingConfig embedding_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SuiteSpec& spec);
SuiteSpec spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RecReport& report);
RecReport report_from_json(const nlohmann::json& j);

/// Canonical bytes: sorted keys, shortest round-trip floats, UTF-8, one
/// trailing newline.
std::string serialize_report(const RecReport& report);
/// Throws DataError on malformed input or a schema_version other than "1".
RecReport parse_report(std::string_view bytes);

/// Canonical serialization without run_id and timestamps; identical for two
/// deterministic runs over the same inputs.
std::string canonical_results(const RecReport& report);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

struct ComparisonRow {
    std::string test;
    std::string field;
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> abs_delta; // b - a
    std::optional<double> rel_delta; // (b - a) / a
    std::optional<double> ratio;     // b / a

    bool operator==(const ComparisonRow&) const = default;
};

struct Comparison {
    std::string model_a;
    std::string model_b;
    std::vector<ComparisonRow> rows;
};

/// Field-by-field deltas between two reports over the same data and tests.
/// Throws ConfigError when dataset fingerprints or test names differ.
Comparison compare_reports(const RecReport& a, const RecReport& b);

std::string format_table(const Comparison& comparison);
nlohmann::json to_json(const Comparison& comparison);

} // namespace reccheck
