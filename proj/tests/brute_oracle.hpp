// SPDX-License-Identifier: Apache-2.0
// Naive reference implementations of the ranking metrics. Written against
// plain vectors with nested loops, independent of the library code.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace brute {

struct Row {
    std::vector<std::string> truth; // first element is the target
    std::vector<std::string> pred;  // empty means skipped
};

struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 0;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Ratio hit_rate(const std::vector<Row>& rows, std::size_t k) {
    Ratio r;
    for (const auto& row : rows) {
        if (row.pred.empty()) continue;
        r.den += 1;
        for (std::size_t i = 0; i < row.pred.size() && i < k; i++)
            if (row.pred[i] == row.truth[0]) {
                r.num += 1;
                break;
            }
    }
    return r;
}

inline double mrr(const std::vector<Row>& rows, std::size_t k, std::size_t* n_out = nullptr) {
    double total = 0;
    std::size_t n = 0;
    for (const auto& row : rows) {
        if (row.pred.empty()) continue;
        n++;
        double rr = 0;
        for (std::size_t i = 0; i < row.pred.size() && i < k; i++)
            if (row.pred[i] == row.truth[0]) {
                rr = 1.0 / double(i + 1);
                break;
            }
        total += rr;
    }
    if (n_out) *n_out = n;
    return total / double(n);
}

inline Ratio coverage(const std::vector<Row>& rows, std::size_t k, std::size_t catalog_size) {
    std::set<std::string> seen;
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.pred.size() && i < k; i++) seen.insert(row.pred[i]);
    return Ratio{static_cast<std::int64_t>(seen.size()), static_cast<std::int64_t>(catalog_size)};
}

inline Ratio popularity_bias(const std::vector<Row>& rows, std::size_t k,
                             const std::map<std::string, std::int64_t>& pop) {
    std::int64_t total = 0;
    for (const auto& kv : pop) total += kv.second;
    std::int64_t num = 0;
    std::int64_t slots = 0;
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.pred.size() && i < k; i++) {
            slots++;
            auto it = pop.find(row.pred[i]);
            if (it != pop.end()) num += it->second;
        }
    return Ratio{num, total * slots};
}

} // namespace brute
