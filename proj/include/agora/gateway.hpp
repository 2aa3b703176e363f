#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agora/errors.hpp"
#include "agora/util.hpp"

#include "json.hpp"

namespace agora {

// Caller-supplied purpose label on every completion. Scripted fixtures key
// their replay on these, so the set is closed and documented here.
namespace tags {
inline constexpr const char* boss_directive = "boss_directive";
inline constexpr const char* worker_turn = "worker_turn";
inline constexpr const char* extract_triples = "extract_triples";
inline constexpr const char* nl_to_pattern = "nl_to_pattern";
inline constexpr const char* rows_to_nl = "rows_to_nl";
inline constexpr const char* nl_to_asp = "nl_to_asp";
inline constexpr const char* models_to_nl = "models_to_nl";
inline constexpr const char* grade_doc = "grade_doc";
inline constexpr const char* rewrite_query = "rewrite_query";
inline constexpr const char* synthesize = "synthesize";
inline constexpr const char* update_beliefs = "update_beliefs";
inline constexpr const char* single_mode = "single_mode";
inline constexpr const char* cot_mode = "cot_mode";

inline constexpr std::array<const char*, 13> all = {
    boss_directive, worker_turn,  extract_triples, nl_to_pattern, rows_to_nl,    nl_to_asp, models_to_nl,
    grade_doc,      rewrite_query, synthesize,     update_beliefs, single_mode,  cot_mode,
};

inline bool is_known(std::string_view tag) {
    for (const char* t : all)
        if (tag == t) return true;
    return false;
}
} // namespace tags

struct CompletionRequest {
    std::string system;
    std::string user;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::string tag;
};

struct SearchResult {
    std::string title;
    std::string snippet;
    std::string url;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
    // True when the backend never touches the network.
    virtual bool offline() const = 0;
};

struct ScriptEntry {
    // Matches a request tag exactly, or by prefix when the pattern ends in
    // '*' ("nl_*"), or any tag when the pattern is "*".
    std::string pattern;
    std::string response;
};

inline bool tag_pattern_matches(std::string_view pattern, std::string_view tag) {
    if (pattern == "*") return true;
    if (!pattern.empty() && pattern.back() == '*')
        return tag.substr(0, pattern.size() - 1) == pattern.substr(0, pattern.size() - 1);
    return pattern == tag;
}

// Deterministic stand-in for a chat provider. Each call consumes the first
// unconsumed entry whose pattern matches the request tag; running out for a
// tag is an error, never silent recycling.
class ScriptedBackend : public ChatBackend {
public:
    ScriptedBackend() = default;
    explicit ScriptedBackend(std::vector<ScriptEntry> script) : script_(std::move(script)) {
        consumed_.assign(script_.size(), false);
    }

    void push(std::string pattern, std::string response) {
        script_.push_back({std::move(pattern), std::move(response)});
        consumed_.push_back(false);
    }

    std::string complete(const CompletionRequest& request) override {
        std::lock_guard lock(mutex_);
        calls_.push_back(request);
        for (std::size_t i = 0; i < script_.size(); ++i) {
            if (!consumed_[i] && tag_pattern_matches(script_[i].pattern, request.tag)) {
                consumed_[i] = true;
                return script_[i].response;
            }
        }
        throw ScriptExhausted(request.tag);
    }

    bool offline() const override { return true; }

    std::size_t remaining() const {
        std::lock_guard lock(mutex_);
        std::size_t n = 0;
        for (bool c : consumed_)
            if (!c) ++n;
        return n;
    }

    // Every request seen, in order; tests assert on prompt contents.
    std::vector<CompletionRequest> calls() const {
        std::lock_guard lock(mutex_);
        return calls_;
    }

private:
    std::vector<ScriptEntry> script_;
    std::vector<bool> consumed_;
    std::vector<CompletionRequest> calls_;
    mutable std::mutex mutex_;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual std::size_t dimension() const = 0;
};

// Hashed character-trigram counts, L2-normalized. Deterministic and
// order-sensitive; strings shorter than three characters hash whole.
class TrigramEmbedder : public Embedder {
public:
    explicit TrigramEmbedder(std::size_t dimension = 256) : dimension_(dimension) {}

    std::vector<double> embed(const std::string& text) override {
        if (text.empty()) throw EmptyText();
        std::vector<double> v(dimension_, 0.0);
        if (text.size() < 3) {
            v[fnv1a64(text) % dimension_] += 1.0;
        } else {
            for (std::size_t i = 0; i + 3 <= text.size(); ++i)
                v[fnv1a64(std::string_view(text).substr(i, 3)) % dimension_] += 1.0;
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
        return v;
    }

    std::size_t dimension() const override { return dimension_; }

private:
    std::size_t dimension_;
};

class SearchClient {
public:
    virtual ~SearchClient() = default;
    virtual std::vector<SearchResult> search(const std::string& query, int k) = 0;
    virtual bool offline() const = 0;
};

// Canned results keyed by exact query string; unknown queries yield nothing.
class FixtureSearchClient : public SearchClient {
public:
    FixtureSearchClient() = default;

    void add(const std::string& query, std::vector<SearchResult> results) {
        fixtures_[query] = std::move(results);
    }

    std::vector<SearchResult> search(const std::string& query, int k) override {
        auto it = fixtures_.find(query);
        if (it == fixtures_.end()) return {};
        auto results = it->second;
        if (static_cast<int>(results.size()) > k) results.resize(static_cast<std::size_t>(k));
        return results;
    }

    bool offline() const override { return true; }

private:
    std::map<std::string, std::vector<SearchResult>> fixtures_;
};

struct GatewayCounters {
    std::map<std::string, std::size_t> completions_by_tag;
    std::size_t embed_calls = 0;
    std::size_t search_calls = 0;
};

// Single front door to the chat, embedding, and search providers. Shareable
// across sessions; counters are the observability hook the eval harness and
// the routing tests rely on.
class Gateway {
public:
    Gateway(std::unique_ptr<ChatBackend> chat, std::unique_ptr<Embedder> embedder,
            std::unique_ptr<SearchClient> search)
        : chat_(std::move(chat)), embedder_(std::move(embedder)), search_(std::move(search)) {}

    std::string complete(const CompletionRequest& request) {
        if (request.system.empty() || request.user.empty())
            throw GatewayFailure("completion request requires non-empty system and user text");
        if (!tags::is_known(request.tag))
            throw GatewayFailure("unknown completion tag '" + request.tag + "'");
        if (!chat_) throw GatewayFailure("no chat backend configured");
        {
            std::lock_guard lock(mutex_);
            ++counters_.completions_by_tag[request.tag];
        }
        return chat_->complete(request);
    }

    std::vector<double> embed_text(const std::string& text) {
        if (text.empty()) throw EmptyText();
        if (!embedder_) throw GatewayFailure("no embedder configured");
        {
            std::lock_guard lock(mutex_);
            ++counters_.embed_calls;
        }
        return embedder_->embed(text);
    }

    std::size_t embedding_dimension() const {
        if (!embedder_) throw GatewayFailure("no embedder configured");
        return embedder_->dimension();
    }

    std::vector<SearchResult> web_search(const std::string& query, int k) {
        if (k <= 0) throw std::invalid_argument("web_search requires k >= 1");
        if (!search_) throw SearchUnavailable();
        {
            std::lock_guard lock(mutex_);
            ++counters_.search_calls;
        }
        return search_->search(query, k);
    }

    bool offline() const {
        return (!chat_ || chat_->offline()) && (!search_ || search_->offline());
    }

    GatewayCounters counters() const {
        std::lock_guard lock(mutex_);
        return counters_;
    }

    ChatBackend* chat_backend() { return chat_.get(); }
    SearchClient* search_client() { return search_.get(); }

private:
    std::unique_ptr<ChatBackend> chat_;
    std::unique_ptr<Embedder> embedder_;
    std::unique_ptr<SearchClient> search_;
    GatewayCounters counters_;
    mutable std::mutex mutex_;
};

// --- Script files ------------------------------------------------------------
//
// One JSONL file drives a whole offline run. Two line shapes:
//   {"tag": "<pattern>", "response": "<canned completion>"}
//   {"search_query": "<query>", "results": [{"title","snippet","url"}, ...]}

struct ScriptFile {
    std::vector<ScriptEntry> completions;
    std::map<std::string, std::vector<SearchResult>> searches;
};

inline ScriptFile parse_script_jsonl(const std::string& content) {
    ScriptFile file;
    int lineno = 0;
    for (const auto& line : split_lines(content)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error("script_invalid",
                        "script line " + std::to_string(lineno) + " is not valid JSON: " + e.what());
        }
        if (j.contains("tag")) {
            file.completions.push_back({j.at("tag").get<std::string>(), j.at("response").get<std::string>()});
        } else if (j.contains("search_query")) {
            std::vector<SearchResult> results;
            for (const auto& r : j.at("results")) {
                results.push_back({r.value("title", ""), r.value("snippet", ""), r.value("url", "")});
            }
            file.searches[j.at("search_query").get<std::string>()] = std::move(results);
        } else {
            throw Error("script_invalid", "script line " + std::to_string(lineno) +
                                              " has neither 'tag' nor 'search_query'");
        }
    }
    return file;
}

inline std::unique_ptr<Gateway> make_scripted_gateway(const ScriptFile& file,
                                                      std::size_t embedding_dimension = 256) {
    auto search = std::make_unique<FixtureSearchClient>();
    for (const auto& [query, results] : file.searches) search->add(query, results);
    return std::make_unique<Gateway>(std::make_unique<ScriptedBackend>(file.completions),
                                     std::make_unique<TrigramEmbedder>(embedding_dimension),
                                     std::move(search));
}

} // namespace agora
