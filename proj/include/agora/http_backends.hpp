#pragma once

// Remote providers: provider-style JSON chat completion and a minimal web
// search client. Kept out of gateway.hpp so offline builds and most tests
// never pull in the HTTP stack.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>

#include "agora/errors.hpp"
#include "agora/gateway.hpp"

#include "httplib.h"
#include "json.hpp"

namespace agora {

struct RemoteOptions {
    std::string api_base;   // e.g. http://127.0.0.1:8080 or https://api.example.com
    std::string api_key;
    std::string model = "gpt-4o";
    std::string completions_path = "/v1/chat/completions";
    std::string search_base;
    std::string search_key;
    std::string search_path = "/search";
    int max_retries = 3; // transient-failure retries after the first attempt
    std::chrono::milliseconds backoff_base{500};
    std::chrono::seconds timeout{60};
};

inline RemoteOptions remote_options_from_env() {
    RemoteOptions opts;
    if (const char* v = std::getenv("LLM_API_BASE")) opts.api_base = v;
    if (const char* v = std::getenv("LLM_API_KEY")) opts.api_key = v;
    if (const char* v = std::getenv("LLM_MODEL")) opts.model = v;
    if (const char* v = std::getenv("SEARCH_API_BASE")) opts.search_base = v;
    if (const char* v = std::getenv("SEARCH_API_KEY")) opts.search_key = v;
    return opts;
}

class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(RemoteOptions options) : options_(std::move(options)) {
        if (options_.api_base.empty())
            throw GatewayFailure("remote mode requires LLM_API_BASE");
    }

    std::string complete(const CompletionRequest& request) override {
        nlohmann::json body{{"model", options_.model},
                            {"temperature", request.temperature},
                            {"max_tokens", request.max_tokens},
                            {"messages",
                             {{{"role", "system"}, {"content", request.system}},
                              {{"role", "user"}, {"content", request.user}}}}};
        std::string last_error;
        for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(options_.backoff_base * (1 << (attempt - 1)));
            httplib::Client client(options_.api_base);
            client.set_connection_timeout(options_.timeout);
            client.set_read_timeout(options_.timeout);
            httplib::Headers headers;
            if (!options_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + options_.api_key);
            auto res = client.Post(options_.completions_path, headers, body.dump(), "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error: HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw GatewayFailure("HTTP " + std::to_string(res->status) + ": " + res->body);
            try {
                auto j = nlohmann::json::parse(res->body);
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw GatewayFailure(std::string("unexpected completion payload: ") + e.what());
            }
        }
        throw GatewayFailure("retries exhausted; last error: " + last_error);
    }

    bool offline() const override { return false; }

private:
    RemoteOptions options_;
};

class HttpSearchClient : public SearchClient {
public:
    explicit HttpSearchClient(RemoteOptions options) : options_(std::move(options)) {
        if (options_.search_base.empty())
            throw SearchUnavailable("remote search requires SEARCH_API_BASE");
    }

    std::vector<SearchResult> search(const std::string& query, int k) override {
        nlohmann::json body{{"query", query}, {"max_results", k}};
        if (!options_.search_key.empty()) body["api_key"] = options_.search_key;
        httplib::Client client(options_.search_base);
        client.set_connection_timeout(options_.timeout);
        client.set_read_timeout(options_.timeout);
        auto res = client.Post(options_.search_path, body.dump(), "application/json");
        if (!res) throw SearchUnavailable("transport error: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw SearchUnavailable("HTTP " + std::to_string(res->status));
        std::vector<SearchResult> results;
        try {
            auto j = nlohmann::json::parse(res->body);
            for (const auto& r : j.value("results", nlohmann::json::array())) {
                results.push_back({r.value("title", ""), r.value("content", r.value("snippet", "")),
                                   r.value("url", "")});
                if (static_cast<int>(results.size()) >= k) break;
            }
        } catch (const nlohmann::json::exception& e) {
            throw SearchUnavailable(std::string("unexpected search payload: ") + e.what());
        }
        return results;
    }

    bool offline() const override { return false; }

private:
    RemoteOptions options_;
};

inline std::unique_ptr<Gateway> make_remote_gateway(const RemoteOptions& options,
                                                    std::size_t embedding_dimension = 256) {
    std::unique_ptr<SearchClient> search;
    if (!options.search_base.empty()) search = std::make_unique<HttpSearchClient>(options);
    return std::make_unique<Gateway>(std::make_unique<HttpChatBackend>(options),
                                     std::make_unique<TrigramEmbedder>(embedding_dimension),
                                     std::move(search));
}

} // namespace agora
