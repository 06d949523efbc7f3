// SPDX-License-Identifier: Apache-2.0
#include "reccheck/dataset.hpp"

#include "reccheck/error.hpp"
#include "text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace reccheck {

using nlohmann::json;

std::optional<FileFormat> parse_file_format(std::string_view name) {
    if (name == "jsonl") return FileFormat::jsonl;
    if (name == "csv") return FileFormat::csv;
    return std::nullopt;
}

std::string_view to_string(EventType type) {
    switch (type) {
    case EventType::view: return "view";
    case EventType::add: return "add";
    case EventType::purchase: return "purchase";
    }
    return "view";
}

std::optional<EventType> parse_event_type(std::string_view name) {
    if (name == "view") return EventType::view;
    if (name == "add") return EventType::add;
    if (name == "purchase") return EventType::purchase;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Taxonomy

Taxonomy::Taxonomy() { nodes_.push_back(Node{"", kRoot, 0}); }

Taxonomy::NodeId Taxonomy::insert(const std::vector<std::string>& path) {
    NodeId current = kRoot;
    for (const auto& label : path) {
        auto key = std::make_pair(current, label);
        auto it = children_.find(key);
        if (it == children_.end()) {
            NodeId id = nodes_.size();
            nodes_.push_back(Node{label, current, nodes_[current].depth + 1});
            children_.emplace(std::move(key), id);
            current = id;
        } else {
            current = it->second;
        }
    }
    return current;
}

std::optional<Taxonomy::NodeId> Taxonomy::find(const std::vector<std::string>& path) const {
    NodeId current = kRoot;
    for (const auto& label : path) {
        auto it = children_.find(std::make_pair(current, label));
        if (it == children_.end()) return std::nullopt;
        current = it->second;
    }
    return current;
}

Taxonomy::NodeId Taxonomy::lowest_common_ancestor(NodeId a, NodeId b) const {
    while (nodes_.at(a).depth > nodes_.at(b).depth) a = nodes_[a].parent;
    while (nodes_.at(b).depth > nodes_.at(a).depth) b = nodes_[b].parent;
    while (a != b) {
        a = nodes_[a].parent;
        b = nodes_[b].parent;
    }
    return a;
}

std::size_t Taxonomy::path_length(NodeId a, NodeId b) const {
    const NodeId lca = lowest_common_ancestor(a, b);
    return depth(a) + depth(b) - 2 * depth(lca);
}

// ---------------------------------------------------------------------------
// Catalog

void Catalog::add(ItemMeta meta) {
    if (meta.item_id.empty()) throw DataError("catalog item with empty item_id");
    if (meta.price && (*meta.price < 0 || !std::isfinite(*meta.price)))
        throw DataError("negative or non-finite price for item '" + meta.item_id + "'");
    for (const auto& label : meta.category_path)
        if (label.empty())
            throw DataError("empty category label for item '" + meta.item_id + "'");
    if (items_.count(meta.item_id))
        throw DataError("duplicate item_id '" + meta.item_id + "' in catalog");

    const auto node = taxonomy_.insert(meta.category_path);
    if (!meta.category_path.empty()) item_nodes_.emplace(meta.item_id, node);
    auto id = meta.item_id;
    items_.emplace(std::move(id), std::move(meta));
}

const ItemMeta* Catalog::find(const ItemId& id) const {
    auto it = items_.find(id);
    return it == items_.end() ? nullptr : &it->second;
}

std::optional<Taxonomy::NodeId> Catalog::category_node(const ItemId& id) const {
    auto it = item_nodes_.find(id);
    if (it == item_nodes_.end()) return std::nullopt;
    return it->second;
}

bool Catalog::has_brands() const {
    return std::any_of(items_.begin(), items_.end(),
                       [](const auto& kv) { return kv.second.brand.has_value(); });
}

bool Catalog::has_categories() const { return !item_nodes_.empty(); }

bool Catalog::has_prices() const {
    return std::any_of(items_.begin(), items_.end(),
                       [](const auto& kv) { return kv.second.price.has_value(); });
}

std::vector<std::string> split_category_path(std::string_view joined) {
    std::vector<std::string> out;
    if (joined.empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto pos = joined.find('>', start);
        out.emplace_back(detail::trim(joined.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string join_category_path(const std::vector<std::string>& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += '>';
        out += path[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
    throw DataError("line " + std::to_string(line) + ": " + what);
}

Interaction interaction_from_json(const json& row, std::size_t line) {
    if (!row.is_object()) fail_at(line, "expected a JSON object");
    Interaction out;
    auto sid = row.find("session_id");
    if (sid == row.end() || !sid->is_string()) fail_at(line, "missing or non-string session_id");
    out.session_id = sid->get<std::string>();
    auto iid = row.find("item_id");
    if (iid == row.end() || !iid->is_string()) fail_at(line, "missing or non-string item_id");
    out.item_id = iid->get<std::string>();
    if (out.item_id.empty()) fail_at(line, "empty item_id");
    auto ts = row.find("timestamp");
    if (ts == row.end() || !ts->is_number_integer()) fail_at(line, "missing or non-integer timestamp");
    out.timestamp = ts->get<std::int64_t>();
    if (out.timestamp < 0) fail_at(line, "negative timestamp");
    auto ev = row.find("event_type");
    if (ev != row.end() && !ev->is_null()) {
        if (!ev->is_string()) fail_at(line, "non-string event_type");
        auto parsed = parse_event_type(ev->get<std::string>());
        if (!parsed) fail_at(line, "unknown event_type '" + ev->get<std::string>() + "'");
        out.event_type = *parsed;
    }
    return out;
}

std::int64_t parse_timestamp(std::string_view text, std::size_t line) {
    std::int64_t value = 0;
    if (!detail::parse_int(text, value)) fail_at(line, "non-integer timestamp '" + std::string(text) + "'");
    if (value < 0) fail_at(line, "negative timestamp");
    return value;
}

ItemMeta item_from_json(const json& row, std::size_t line) {
    if (!row.is_object()) fail_at(line, "expected a JSON object");
    ItemMeta meta;
    auto iid = row.find("item_id");
    if (iid == row.end() || !iid->is_string()) fail_at(line, "missing or non-string item_id");
    meta.item_id = iid->get<std::string>();
    if (meta.item_id.empty()) fail_at(line, "empty item_id");
    if (auto p = row.find("price"); p != row.end() && !p->is_null()) {
        if (!p->is_number()) fail_at(line, "non-numeric price");
        meta.price = p->get<double>();
        if (*meta.price < 0) fail_at(line, "negative price");
    }
    if (auto b = row.find("brand"); b != row.end() && !b->is_null()) {
        if (!b->is_string()) fail_at(line, "non-string brand");
        meta.brand = b->get<std::string>();
    }
    if (auto c = row.find("category_path"); c != row.end() && !c->is_null()) {
        if (!c->is_string()) fail_at(line, "category_path must be a '>'-joined string");
        meta.category_path = split_category_path(c->get<std::string>());
    }
    if (auto e = row.find("extra"); e != row.end() && !e->is_null()) {
        if (!e->is_object()) fail_at(line, "extra must be an object");
        for (const auto& [key, value] : e->items())
            meta.extra[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    return meta;
}

template <class RowFn>
void for_each_jsonl_row(std::string_view text, RowFn&& fn) {
    std::size_t line_no = 0;
    detail::for_each_line(text, [&](std::string_view line) {
        ++line_no;
        if (detail::trim(line).empty()) return;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            fail_at(line_no, std::string("invalid JSON: ") + e.what());
        }
        fn(row, line_no);
    });
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows; // (line, fields)

    std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

CsvTable read_csv(std::string_view text) {
    CsvTable table;
    std::size_t line_no = 0;
    detail::for_each_line(text, [&](std::string_view line) {
        ++line_no;
        if (detail::trim(line).empty()) return;
        std::vector<std::string> fields;
        if (!detail::split_csv_line(line, fields)) fail_at(line_no, "unterminated quoted field");
        if (table.header.empty()) {
            for (auto& f : fields) f = std::string(detail::trim(f));
            table.header = std::move(fields);
            return;
        }
        if (fields.size() != table.header.size())
            fail_at(line_no, "expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        table.rows.emplace_back(line_no, std::move(fields));
    });
    return table;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

std::vector<Interaction> parse_interactions(std::string_view text, FileFormat format) {
    std::vector<Interaction> out;
    if (format == FileFormat::jsonl) {
        for_each_jsonl_row(text, [&](const json& row, std::size_t line) {
            out.push_back(interaction_from_json(row, line));
        });
        return out;
    }
    const CsvTable table = read_csv(text);
    if (table.header.empty()) return out;
    const auto sid = table.column("session_id");
    const auto iid = table.column("item_id");
    const auto ts = table.column("timestamp");
    const auto ev = table.column("event_type");
    if (!sid || !iid || !ts) fail_at(1, "header must contain session_id,item_id,timestamp");
    for (const auto& [line, fields] : table.rows) {
        Interaction row;
        row.session_id = fields[*sid];
        row.item_id = fields[*iid];
        if (row.item_id.empty()) fail_at(line, "missing item_id");
        row.timestamp = parse_timestamp(detail::trim(fields[*ts]), line);
        if (ev && !fields[*ev].empty()) {
            auto parsed = parse_event_type(fields[*ev]);
            if (!parsed) fail_at(line, "unknown event_type '" + fields[*ev] + "'");
            row.event_type = *parsed;
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<Interaction> load_interactions(const std::filesystem::path& path, FileFormat format) {
    return parse_interactions(read_file(path), format);
}

Catalog parse_catalog(std::string_view text, FileFormat format) {
    Catalog catalog;
    auto add = [&](ItemMeta meta, std::size_t line) {
        try {
            catalog.add(std::move(meta));
        } catch (const DataError& e) {
            fail_at(line, e.what());
        }
    };
    if (format == FileFormat::jsonl) {
        for_each_jsonl_row(text, [&](const json& row, std::size_t line) {
            add(item_from_json(row, line), line);
        });
        return catalog;
    }
    const CsvTable table = read_csv(text);
    if (table.header.empty()) return catalog;
    const auto iid = table.column("item_id");
    if (!iid) fail_at(1, "header must contain item_id");
    const auto price = table.column("price");
    const auto brand = table.column("brand");
    const auto path = table.column("category_path");
    for (const auto& [line, fields] : table.rows) {
        ItemMeta meta;
        meta.item_id = fields[*iid];
        if (meta.item_id.empty()) fail_at(line, "missing item_id");
        if (price && !detail::trim(fields[*price]).empty()) {
            double value = 0;
            if (!detail::parse_double(detail::trim(fields[*price]), value))
                fail_at(line, "non-numeric price '" + fields[*price] + "'");
            if (value < 0) fail_at(line, "negative price");
            meta.price = value;
        }
        if (brand && !fields[*brand].empty()) meta.brand = fields[*brand];
        if (path) meta.category_path = split_category_path(fields[*path]);
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c == *iid || c == price || c == brand || c == path) continue;
            if (!fields[c].empty()) meta.extra[table.header[c]] = fields[c];
        }
        add(std::move(meta), line);
    }
    return catalog;
}

Catalog load_catalog(const std::filesystem::path& path, FileFormat format) {
    return parse_catalog(read_file(path), format);
}

// ---------------------------------------------------------------------------
// Sessions

SessionSet sessionize(const std::vector<Interaction>& interactions, std::optional<std::int64_t> gap_ms) {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < interactions.size(); ++i) {
        auto [it, inserted] = index.try_emplace(interactions[i].session_id, groups.size());
        if (inserted) {
            groups.emplace_back();
            ids.push_back(interactions[i].session_id);
        }
        groups[it->second].push_back(i);
    }

    SessionSet out;
    out.reserve(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto& rows = groups[g];
        std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
            return interactions[a].timestamp < interactions[b].timestamp;
        });
        std::size_t piece = 0;
        Session current;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& row = interactions[rows[r]];
            if (gap_ms && !current.items.empty() && row.timestamp - current.timestamps.back() > *gap_ms) {
                current.session_id = ids[g] + "#" + std::to_string(piece++);
                out.push_back(std::move(current));
                current = Session{};
            }
            current.items.push_back(row.item_id);
            current.timestamps.push_back(row.timestamp);
        }
        current.session_id = gap_ms ? ids[g] + "#" + std::to_string(piece) : ids[g];
        out.push_back(std::move(current));
    }
    return out;
}

std::vector<Interaction> flatten(const SessionSet& sessions) {
    std::vector<Interaction> out;
    for (const auto& s : sessions)
        for (std::size_t i = 0; i < s.items.size(); ++i)
            out.push_back(Interaction{s.session_id, s.items[i], s.timestamps[i], EventType::view});
    return out;
}

SplitResult temporal_split(const SessionSet& sessions, const SplitRule& rule) {
    if (sessions.empty()) throw DataError("cannot split an empty session set");
    SplitResult out;
    if (const auto* at = std::get_if<SplitAtTimestamp>(&rule)) {
        for (const auto& s : sessions)
            (s.first_timestamp() < at->timestamp ? out.train : out.test).push_back(s);
    } else {
        const double f = std::get<SplitByFraction>(rule).test_fraction;
        if (!(f > 0.0 && f < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
        std::vector<std::size_t> order(sessions.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto ta = sessions[a].first_timestamp();
            const auto tb = sessions[b].first_timestamp();
            if (ta != tb) return ta < tb;
            return sessions[a].session_id < sessions[b].session_id;
        });
        const std::size_t n = sessions.size();
        // floor(f*n), nudged so that products like 0.3*10 land on the integer.
        const auto n_test = static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
        for (std::size_t i = 0; i < n; ++i)
            (i < n - std::min(n_test, n) ? out.train : out.test).push_back(sessions[order[i]]);
    }
    if (out.train.empty()) throw DataError("split leaves the training set empty");
    if (out.test.empty()) throw DataError("split leaves the test set empty");
    return out;
}

TestCaseSet build_test_cases(const SessionSet& test, CaseScheme scheme, std::size_t min_query_len) {
    if (min_query_len == 0) throw ConfigError("min_query_len must be positive");
    TestCaseSet out;
    for (const auto& session : test) {
        std::vector<ItemId> items;
        if (scheme == CaseScheme::cart_last) {
            std::unordered_set<ItemId> seen;
            for (const auto& item : session.items)
                if (seen.insert(item).second) items.push_back(item);
        } else {
            items = session.items;
        }
        if (items.size() < min_query_len + 1) continue;
        ++out.eligible_sessions;
        TestCase tc;
        tc.ground_truth.push_back(items.back());
        items.pop_back();
        tc.query = std::move(items);
        if (std::find(tc.query.begin(), tc.query.end(), tc.primary()) != tc.query.end()) {
            ++out.dropped_overlap;
            continue;
        }
        out.cases.push_back(std::move(tc));
    }
    return out;
}

Popularity item_popularity(const SessionSet& train) {
    Popularity counts;
    for (const auto& s : train)
        for (const auto& item : s.items) ++counts[item];
    return counts;
}

} // namespace reccheck
