// SPDX-License-Identifier: Apache-2.0
#include "reccheck/report.hpp"

#include "reccheck/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>
#include <sstream>

namespace reccheck {

using nlohmann::json;

std::string_view to_string(Task task) {
    switch (task) {
    case Task::similar_items: return "similar_items";
    case Task::complementary_items: return "complementary_items";
    case Task::session_based: return "session_based";
    }
    return "complementary_items";
}

std::optional<Task> parse_task(std::string_view name) {
    if (name == "similar_items" || name == "similar") return Task::similar_items;
    if (name == "complementary_items" || name == "complementary") return Task::complementary_items;
    if (name == "session_based" || name == "session") return Task::session_based;
    return std::nullopt;
}

const TestOutcome* RecReport::find(std::string_view name) const {
    for (const auto& r : results)
        if (r.name == name) return &r;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Result payloads

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json histogram_json(const std::vector<HistogramBin>& bins) {
    json out = json::array();
    for (const auto& b : bins) out.push_back(json::array({b.low, b.high, b.count}));
    return out;
}

json skips_json(const SkipCounts& skips) {
    json out = json::object();
    for (const auto& [reason, n] : skips) out[reason] = n;
    return out;
}

} // namespace

json to_json(const MetricResult& r) {
    return {{"name", r.name},
            {"k", r.k},
            {"value", optional_number(r.value)},
            {"n_cases", r.n_cases},
            {"n_skipped", r.n_skipped}};
}

json to_json(const DistanceReport& r) {
    return {{"name", r.name},
            {"mean_query_to_label", optional_number(r.mean_query_to_label)},
            {"mean_query_to_pred", optional_number(r.mean_query_to_pred)},
            {"histogram_label", histogram_json(r.histogram_label)},
            {"histogram_pred", histogram_json(r.histogram_pred)},
            {"n_cases", r.n_cases},
            {"n_skipped", r.n_skipped},
            {"skips", skips_json(r.skips)}};
}

json to_json(const PathLengthResult& r) {
    return {{"mean", optional_number(r.mean)},
            {"n_cases", r.n_cases},
            {"n_skipped", r.n_skipped},
            {"skips", skips_json(r.skips)}};
}

json to_json(const StrataReport& r) {
    json buckets = json::array();
    for (const auto& b : r.buckets)
        buckets.push_back({{"bucket_low_count", b.low_count},
                           {"bucket_high_count", b.high_count},
                           {"hr_at_k", optional_number(b.hr_at_k)},
                           {"n_cases", b.n_cases}});
    return {{"buckets", buckets},
            {"requested_buckets", r.requested_buckets},
            {"actual_buckets", r.buckets.size()},
            {"n_skipped", r.n_skipped}};
}

json to_json(const SliceReport& r) {
    json slices = json::object();
    for (const auto& [key, s] : r.slices)
        slices[key] = {{"hr_at_k", optional_number(s.hr_at_k)},
                       {"mrr_at_k", optional_number(s.mrr_at_k)},
                       {"n_cases", s.n_cases},
                       {"n_skipped", s.n_skipped}};
    return {{"slices", slices}, {"unsliceable", r.unsliceable}};
}

json to_json(const AsymmetryResult& r) { return {{"score", optional_number(r.score)}, {"n_pairs", r.n_pairs}}; }

json to_json(const PriceAsymmetryResult& r) {
    return {{"frac_cheaper", optional_number(r.frac_cheaper)},
            {"mean_price_ratio", optional_number(r.mean_price_ratio)},
            {"n", r.n},
            {"n_cases", r.n_cases},
            {"n_skipped", r.n_skipped},
            {"skips", skips_json(r.skips)}};
}

// ---------------------------------------------------------------------------
// Spec and report

json to_json(const EmbeddingConfig& c) {
    return {{"dim", c.dim},
            {"window", c.window},
            {"negatives", c.negatives},
            {"epochs", c.epochs},
            {"lr_start", c.lr_start},
            {"lr_end", c.lr_end},
            {"min_count", c.min_count},
            {"seed", c.seed},
            {"table_size", c.table_size}};
}

EmbeddingConfig embedding_config_from_json(const json& j) {
    EmbeddingConfig c;
    c.dim = j.at("dim").get<std::size_t>();
    c.window = j.at("window").get<std::size_t>();
    c.negatives = j.at("negatives").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.lr_start = j.at("lr_start").get<double>();
    c.lr_end = j.at("lr_end").get<double>();
    c.min_count = j.at("min_count").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.table_size = j.at("table_size").get<std::size_t>();
    return c;
}

json to_json(const SuiteSpec& spec) {
    json tests = json::array();
    for (const auto& t : spec.tests) tests.push_back({{"name", t.name}, {"kind", t.kind}, {"params", t.params}});
    return {{"task", to_string(spec.task)},
            {"tests", tests},
            {"k", spec.k},
            {"seed", spec.seed},
            {"embedding", to_json(spec.embedding)},
            {"batch_size", spec.batch_size},
            {"min_query_len", spec.min_query_len}};
}

SuiteSpec spec_from_json(const json& j) {
    SuiteSpec spec;
    auto task = parse_task(j.at("task").get<std::string>());
    if (!task) throw DataError("unknown task '" + j.at("task").get<std::string>() + "'");
    spec.task = *task;
    for (const auto& t : j.at("tests"))
        spec.tests.push_back(TestDescriptor{t.at("name").get<std::string>(), t.at("kind").get<std::string>(),
                                            t.value("params", json::object())});
    spec.k = j.at("k").get<std::size_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.embedding = embedding_config_from_json(j.at("embedding"));
    spec.batch_size = j.at("batch_size").get<std::size_t>();
    spec.min_query_len = j.at("min_query_len").get<std::size_t>();
    return spec;
}

json to_json(const RecReport& report) {
    json results = json::array();
    for (const auto& r : report.results) {
        json entry = {{"name", r.name}, {"kind", r.kind}};
        if (r.error) {
            entry["status"] = "failed";
            entry["error"] = *r.error;
        } else {
            entry["status"] = "ok";
            entry["output"] = r.output;
        }
        results.push_back(std::move(entry));
    }
    json skips = json::object();
    for (const auto& [name, n] : report.skip_counters) skips[name] = n;
    return {{"schema_version", report.schema_version},
            {"run_id", report.run_id},
            {"model_name", report.model_name},
            {"code_version", report.code_version},
            {"dataset_fingerprint", report.dataset_fingerprint},
            {"config_fingerprint", report.config_fingerprint},
            {"spec", to_json(report.spec)},
            {"started_at", report.started_at},
            {"finished_at", report.finished_at},
            {"n_test_cases", report.n_test_cases},
            {"results", results},
            {"skip_counters", skips},
            {"deterministic", report.deterministic}};
}

RecReport report_from_json(const json& j) {
    if (!j.is_object()) throw DataError("report: expected a JSON object");
    const auto version = j.value("schema_version", std::string{});
    if (version != kSchemaVersion)
        throw DataError("report: unsupported schema_version '" + version + "' (expected '" +
                        std::string(kSchemaVersion) + "')");
    try {
        RecReport r;
        r.schema_version = version;
        r.run_id = j.at("run_id").get<std::string>();
        r.model_name = j.at("model_name").get<std::string>();
        r.code_version = j.at("code_version").get<std::string>();
        r.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
        r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
        r.spec = spec_from_json(j.at("spec"));
        r.started_at = j.at("started_at").get<std::string>();
        r.finished_at = j.at("finished_at").get<std::string>();
        r.n_test_cases = j.at("n_test_cases").get<std::size_t>();
        for (const auto& entry : j.at("results")) {
            TestOutcome o{entry.at("name").get<std::string>(), entry.at("kind").get<std::string>(), nullptr,
                          std::nullopt};
            if (entry.at("status").get<std::string>() == "failed") {
                o.error = entry.at("error").get<std::string>();
            } else {
                o.output = entry.at("output");
            }
            r.results.push_back(std::move(o));
        }
        for (const auto& [name, n] : j.at("skip_counters").items()) r.skip_counters[name] = n.get<std::uint64_t>();
        r.deterministic = j.at("deterministic").get<bool>();
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("report: ") + e.what());
    }
}

std::string serialize_report(const RecReport& report) { return to_json(report).dump() + "\n"; }

RecReport parse_report(std::string_view bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("report: invalid JSON: ") + e.what());
    }
    return report_from_json(j);
}

std::string canonical_results(const RecReport& report) {
    json j = to_json(report);
    j.erase("run_id");
    j.erase("started_at");
    j.erase("finished_at");
    return j.dump() + "\n";
}

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw Error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Comparison

namespace {

bool comparable_field(const std::string& key) {
    static const std::set<std::string> fields = {"value",   "mean_query_to_label", "mean_query_to_pred",
                                                 "mean",    "hr_at_k",             "mrr_at_k",
                                                 "score",   "frac_cheaper",        "mean_price_ratio"};
    return fields.count(key) != 0;
}

// Collects comparable leaves as path -> value (null stays nullopt).
void flatten_scalars(const json& node, const std::string& path, std::map<std::string, std::optional<double>>& out) {
    if (node.is_object()) {
        for (const auto& [key, child] : node.items()) {
            const std::string child_path = path.empty() ? key : path + "." + key;
            if (comparable_field(key) && (child.is_number() || child.is_null())) {
                out[child_path] = child.is_null() ? std::nullopt : std::optional<double>(child.get<double>());
            } else if (child.is_structured() && key != "histogram_label" && key != "histogram_pred") {
                flatten_scalars(child, child_path, out);
            }
        }
    } else if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i)
            flatten_scalars(node[i], path + "[" + std::to_string(i) + "]", out);
    }
}

} // namespace

Comparison compare_reports(const RecReport& a, const RecReport& b) {
    if (a.dataset_fingerprint != b.dataset_fingerprint)
        throw ConfigError("reports were produced on different datasets (" + a.dataset_fingerprint.substr(0, 12) +
                          " vs " + b.dataset_fingerprint.substr(0, 12) + ")");
    std::set<std::string> names_a;
    std::set<std::string> names_b;
    for (const auto& r : a.results) names_a.insert(r.name);
    for (const auto& r : b.results) names_b.insert(r.name);
    if (names_a != names_b) {
        std::string msg = "reports cover different tests:";
        for (const auto& n : names_a)
            if (!names_b.count(n)) msg += " -" + n;
        for (const auto& n : names_b)
            if (!names_a.count(n)) msg += " +" + n;
        throw ConfigError(msg);
    }

    Comparison cmp{a.model_name, b.model_name, {}};
    for (const auto& ra : a.results) {
        const TestOutcome* rb = b.find(ra.name);
        if (ra.error || rb->error) continue;
        std::map<std::string, std::optional<double>> fa;
        std::map<std::string, std::optional<double>> fb;
        flatten_scalars(ra.output, "", fa);
        flatten_scalars(rb->output, "", fb);
        for (const auto& [field, va] : fa) {
            auto it = fb.find(field);
            if (it == fb.end()) continue;
            ComparisonRow row{ra.name, field, va, it->second, std::nullopt, std::nullopt, std::nullopt};
            if (va && it->second) {
                row.abs_delta = *it->second - *va;
                if (*va != 0.0) {
                    row.rel_delta = (*it->second - *va) / *va;
                    row.ratio = *it->second / *va;
                }
            }
            cmp.rows.push_back(std::move(row));
        }
    }
    return cmp;
}

namespace {

std::string fmt_number(const std::optional<double>& v, bool percent = false) {
    if (!v) return "-";
    char buf[64];
    if (percent) {
        std::snprintf(buf, sizeof buf, "%+.1f%%", *v * 100.0);
    } else {
        std::snprintf(buf, sizeof buf, "%.6g", *v);
    }
    return buf;
}

} // namespace

std::string format_table(const Comparison& cmp) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"test", "field", cmp.model_a, cmp.model_b, "delta", "rel_delta", "ratio"});
    for (const auto& r : cmp.rows)
        rows.push_back({r.test, r.field, fmt_number(r.a), fmt_number(r.b), fmt_number(r.abs_delta),
                        fmt_number(r.rel_delta, true), fmt_number(r.ratio)});
    std::vector<std::size_t> widths(rows.front().size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    std::ostringstream out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size()) out << std::string(widths[c] - row[c].size() + 2, ' ');
        }
        out << '\n';
    }
    return out.str();
}

json to_json(const Comparison& cmp) {
    json rows = json::array();
    for (const auto& r : cmp.rows)
        rows.push_back({{"test", r.test},
                        {"field", r.field},
                        {"a", optional_number(r.a)},
                        {"b", optional_number(r.b)},
                        {"abs_delta", optional_number(r.abs_delta)},
                        {"rel_delta", optional_number(r.rel_delta)},
                        {"ratio", optional_number(r.ratio)}});
    return {{"model_a", cmp.model_a}, {"model_b", cmp.model_b}, {"rows", rows}};
}

} // namespace reccheck
