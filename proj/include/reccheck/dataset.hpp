// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace reccheck {

using ItemId = std::string;

enum class FileFormat { jsonl, csv };
enum class EventType { view, add, purchase };

std::optional<FileFormat> parse_file_format(std::string_view name);
std::string_view to_string(EventType type);
std::optional<EventType> parse_event_type(std::string_view name);

struct Interaction {
    std::string session_id;
    ItemId item_id;
    std::int64_t timestamp = 0;
    EventType event_type = EventType::view;

    bool operator==(const Interaction&) const = default;
};

/// Items of one session in ascending timestamp order (ties keep input order).
/// `timestamps` is parallel to `items`.
struct Session {
    std::string session_id;
    std::vector<ItemId> items;
    std::vector<std::int64_t> timestamps;

    std::int64_t first_timestamp() const { return timestamps.front(); }
    bool operator==(const Session&) const = default;
};

using SessionSet = std::vector<Session>;

struct ItemMeta {
    ItemId item_id;
    std::optional<double> price;
    std::optional<std::string> brand;
    std::vector<std::string> category_path; // root to leaf; empty when absent
    std::map<std::string, std::string> extra;

    bool operator==(const ItemMeta&) const = default;
};

/// Category tree induced by the set of category-path prefixes, under a
/// synthetic root (node 0, depth 0).
class Taxonomy {
public:
    using NodeId = std::size_t;
    static constexpr NodeId kRoot = 0;

    Taxonomy();

    /// Inserts every prefix of `path` and returns the node of its last label.
    NodeId insert(const std::vector<std::string>& path);
    std::optional<NodeId> find(const std::vector<std::string>& path) const;

    std::size_t size() const { return nodes_.size(); }
    std::size_t depth(NodeId node) const { return nodes_.at(node).depth; }
    NodeId parent(NodeId node) const { return nodes_.at(node).parent; }
    const std::string& label(NodeId node) const { return nodes_.at(node).label; }

    NodeId lowest_common_ancestor(NodeId a, NodeId b) const;
    /// Number of edges on the tree path between two nodes.
    std::size_t path_length(NodeId a, NodeId b) const;

private:
    struct Node {
        std::string label;
        NodeId parent = kRoot;
        std::size_t depth = 0;
    };
    std::vector<Node> nodes_;
    std::map<std::pair<NodeId, std::string>, NodeId> children_;
};

class Catalog {
public:
    Catalog() = default;

    /// Throws DataError on a duplicate id, negative price, or empty category label.
    void add(ItemMeta meta);

    const ItemMeta* find(const ItemId& id) const;
    std::size_t size() const { return items_.size(); }
    const std::map<ItemId, ItemMeta>& items() const { return items_; }
    const Taxonomy& taxonomy() const { return taxonomy_; }

    /// Leaf category node of an item, or nullopt when the item is unknown or
    /// has no category path.
    std::optional<Taxonomy::NodeId> category_node(const ItemId& id) const;

    bool has_brands() const;
    bool has_categories() const;
    bool has_prices() const;

private:
    std::map<ItemId, ItemMeta> items_;
    std::unordered_map<ItemId, Taxonomy::NodeId> item_nodes_;
    Taxonomy taxonomy_;
};

using Popularity = std::unordered_map<ItemId, std::int64_t>;

struct Dataset {
    SessionSet train;
    SessionSet test;
    Catalog catalog;
    Popularity popularity;
};

/// Query (X) and ground truth (Y) of a single evaluation case.
struct TestCase {
    std::vector<ItemId> query;
    std::vector<ItemId> ground_truth;

    const ItemId& primary() const { return ground_truth.front(); }
    bool operator==(const TestCase&) const = default;
};

struct TestCaseSet {
    std::vector<TestCase> cases;
    std::size_t eligible_sessions = 0;
    std::size_t dropped_overlap = 0; // query and ground truth intersected
};

enum class CaseScheme { next_item, cart_last };

struct SplitAtTimestamp {
    std::int64_t timestamp;
};
struct SplitByFraction {
    double test_fraction;
};
using SplitRule = std::variant<SplitAtTimestamp, SplitByFraction>;

struct SplitResult {
    SessionSet train;
    SessionSet test;
};

std::vector<Interaction> load_interactions(const std::filesystem::path& path, FileFormat format);
std::vector<Interaction> parse_interactions(std::string_view text, FileFormat format);

/// Groups interactions by session id, in order of first appearance. When
/// `gap_ms` is set, each group is cut wherever consecutive timestamps differ
/// by more than the gap and every piece is renamed "<id>#<n>".
SessionSet sessionize(const std::vector<Interaction>& interactions,
                      std::optional<std::int64_t> gap_ms = std::nullopt);

/// Inverse of sessionize, used for re-grouping and fingerprinting.
std::vector<Interaction> flatten(const SessionSet& sessions);

Catalog load_catalog(const std::filesystem::path& path, FileFormat format);
Catalog parse_catalog(std::string_view text, FileFormat format);

std::vector<std::string> split_category_path(std::string_view joined);
std::string join_category_path(const std::vector<std::string>& path);

SplitResult temporal_split(const SessionSet& sessions, const SplitRule& rule);

TestCaseSet build_test_cases(const SessionSet& test, CaseScheme scheme,
                             std::size_t min_query_len = 1);

Popularity item_popularity(const SessionSet& train);

} // namespace reccheck
