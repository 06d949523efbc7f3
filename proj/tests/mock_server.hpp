// SPDX-License-Identifier: Apache-2.0
// In-process HTTP server speaking the batch prediction protocol.
#pragma once

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <functional>
#include <string>
#include <thread>

namespace testsupport {

class MockServer {
public:
    // Handler gets the parsed request and returns (status, body).
    using Handler = std::function<std::pair<int, std::string>(const nlohmann::json&)>;

    explicit MockServer(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            if (!req.get_header_value("Authorization").empty()) last_auth = req.get_header_value("Authorization");
            auto [status, body] = handler_(nlohmann::json::parse(req.body));
            res.status = status;
            res.set_content(body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/predict"; }

    std::atomic<int> hits{0};
    std::string last_auth;

private:
    Handler handler_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

// Answers each query with the given items, in order.
inline nlohmann::json lists_body(const std::vector<std::vector<std::string>>& lists) {
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& l : lists) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& id : l) row.push_back({{"item_id", id}});
        preds.push_back(row);
    }
    return {{"predictions", preds}};
}

} // namespace testsupport
