// SPDX-License-Identifier: Apache-2.0
#include "reccheck/models.hpp"

#include "reccheck/error.hpp"

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <future>
#include <thread>

namespace reccheck {

using nlohmann::json;

RemoteModel::RemoteModel(RemoteModelOptions options, std::string name)
    : options_(std::move(options)), name_(std::move(name)) {
    const std::string prefix = "http://";
    if (options_.endpoint.rfind(prefix, 0) != 0)
        throw ConfigError("remote endpoint must be an http:// URL, got '" + options_.endpoint + "'");
    const auto slash = options_.endpoint.find('/', prefix.size());
    scheme_host_port_ = options_.endpoint.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : options_.endpoint.substr(slash);
    if (scheme_host_port_.size() == prefix.size()) throw ConfigError("remote endpoint has no host");
    if (options_.batch_size == 0) throw ConfigError("remote batch size must be positive");
    if (options_.max_in_flight == 0) throw ConfigError("remote in-flight limit must be positive");
    if (options_.max_retries < 0) throw ConfigError("remote retries must be non-negative");
}

RemoteModel::~RemoteModel() = default;

namespace {

std::vector<PredictionList> parse_predictions(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw RemoteError(std::string("remote model: response is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("predictions") || !doc["predictions"].is_array())
        throw RemoteError("remote model: response lacks a 'predictions' array");
    std::vector<PredictionList> out;
    for (const auto& row : doc["predictions"]) {
        if (!row.is_array()) throw RemoteError("remote model: prediction entry is not an array");
        PredictionList list;
        bool all_scored = true;
        std::vector<double> scores;
        for (const auto& entry : row) {
            if (!entry.is_object() || !entry.contains("item_id") || !entry["item_id"].is_string())
                throw RemoteError("remote model: prediction item lacks a string item_id");
            list.items.push_back(entry["item_id"].get<std::string>());
            auto score = entry.find("score");
            if (score != entry.end() && score->is_number()) {
                scores.push_back(score->get<double>());
            } else {
                all_scored = false;
            }
        }
        if (all_scored) list.scores = std::move(scores);
        out.push_back(std::move(list));
    }
    return out;
}

} // namespace

std::vector<PredictionList> RemoteModel::predict_batch(const std::vector<Query>& batch, std::size_t k) const {
    const std::string body = json{{"queries", batch}, {"k", k}}.dump();
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    httplib::Headers headers;
    if (options_.bearer_token) headers.emplace("Authorization", "Bearer " + *options_.bearer_token);

    std::string last_error;
    auto backoff = options_.initial_backoff;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0) {
            spdlog::debug("remote model: retry {} after {} ms ({})", attempt, backoff.count(), last_error);
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        ++requests_;
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            auto lists = parse_predictions(res->body);
            if (lists.size() != batch.size())
                throw RemoteError("remote model: " + std::to_string(lists.size()) + " prediction lists for " +
                                  std::to_string(batch.size()) + " queries");
            for (std::size_t i = 0; i < lists.size(); ++i) {
                auto clean = sanitize_prediction(std::move(lists[i]), batch[i], k);
                violations_ += clean.violations;
                lists[i] = std::move(clean.list);
            }
            return lists;
        }
        last_error = "HTTP status " + std::to_string(res->status);
        if (res->status < 500) break;
    }
    throw RemoteError("remote model: request to " + options_.endpoint + " failed: " + last_error);
}

std::vector<PredictionList> RemoteModel::predict(const std::vector<Query>& queries, std::size_t k) const {
    std::vector<std::vector<Query>> batches;
    for (std::size_t start = 0; start < queries.size(); start += options_.batch_size) {
        const auto end = std::min(queries.size(), start + options_.batch_size);
        batches.emplace_back(queries.begin() + static_cast<std::ptrdiff_t>(start),
                             queries.begin() + static_cast<std::ptrdiff_t>(end));
    }
    std::vector<PredictionList> out;
    out.reserve(queries.size());
    for (std::size_t wave = 0; wave < batches.size(); wave += options_.max_in_flight) {
        const auto wave_end = std::min(batches.size(), wave + options_.max_in_flight);
        std::vector<std::future<std::vector<PredictionList>>> pending;
        for (std::size_t b = wave; b < wave_end; ++b)
            pending.push_back(std::async(std::launch::async, [this, &batches, b, k] {
                return predict_batch(batches[b], k);
            }));
        // get() in order keeps the output aligned; the first failure propagates
        // after all futures of the wave have finished.
        std::exception_ptr failure;
        for (auto& f : pending) {
            try {
                auto lists = f.get();
                for (auto& l : lists) out.push_back(std::move(l));
            } catch (...) {
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    return out;
}

} // namespace reccheck
