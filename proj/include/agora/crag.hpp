#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <shared_mutex>
#include <string>
#include <vector>

#include "agora/errors.hpp"
#include "agora/gateway.hpp"
#include "agora/util.hpp"

#include "json.hpp"

namespace agora {

struct Document {
    std::string id;
    std::string collection;
    std::string text;
    std::vector<double> vector;
    std::map<std::string, std::string> metadata;
};

struct ScoredDocument {
    Document document;
    double score = 0.0;
};

enum class GradeLabel { relevant, irrelevant };

struct GradedDocument {
    Document document;
    double score = 0.0; // cosine similarity against the grading query
    GradeLabel label = GradeLabel::irrelevant;
};

struct CragAnswer {
    enum class Route { internal, web_fallback };
    std::string text;
    Route route = Route::internal;
    std::vector<std::string> used_documents; // document ids or result urls
};

inline std::string to_string(CragAnswer::Route r) {
    return r == CragAnswer::Route::internal ? "internal" : "web_fallback";
}

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Per-collection document storage with brute-force cosine retrieval; linear
// scan is exact and fast at desk scale. Ids are content-hash derived, so
// re-ingesting identical text is a no-op.
class VectorStore {
public:
    explicit VectorStore(Gateway& gateway) : gateway_(&gateway) {}

    bool has_collection(const std::string& name) const {
        std::shared_lock lock(mutex_);
        return collections_.count(name) > 0;
    }

    std::size_t collection_size(const std::string& name) const {
        std::shared_lock lock(mutex_);
        auto it = collections_.find(name);
        return it == collections_.end() ? 0 : it->second.docs.size();
    }

    std::vector<std::string> collection_names() const {
        std::shared_lock lock(mutex_);
        std::vector<std::string> names;
        for (const auto& [name, _] : collections_) names.push_back(name);
        return names;
    }

    std::vector<std::string> ingest(const std::string& collection, const std::vector<std::string>& texts,
                                    const std::vector<std::map<std::string, std::string>>& metadata = {}) {
        if (!metadata.empty() && metadata.size() != texts.size())
            throw std::invalid_argument("texts and metadata must have the same length");
        std::vector<std::string> ids;
        ids.reserve(texts.size());
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (texts[i].empty()) throw EmptyText();
            auto vector = gateway_->embed_text(texts[i]);
            std::unique_lock lock(mutex_);
            auto& col = collections_[collection];
            if (col.docs.empty())
                col.dimension = vector.size();
            else if (col.dimension != vector.size())
                throw DimensionMismatch(col.dimension, vector.size());
            std::string id = "doc-" + hex64(fnv1a64(texts[i]));
            if (!col.by_id.count(id)) {
                col.by_id[id] = col.docs.size();
                col.docs.push_back({id, collection, texts[i], std::move(vector),
                                    metadata.empty() ? std::map<std::string, std::string>{} : metadata[i]});
            }
            ids.push_back(std::move(id));
        }
        return ids;
    }

    // The k highest-cosine documents, descending score, ties broken by
    // ascending document id; fewer than k when the collection is smaller.
    std::vector<ScoredDocument> retrieve_top_k(const std::string& collection, const std::string& query,
                                               int k) const {
        if (k < 0) throw std::invalid_argument("k must be non-negative");
        auto query_vector = gateway_->embed_text(query);
        std::shared_lock lock(mutex_);
        auto it = collections_.find(collection);
        if (it == collections_.end()) throw UnknownCollection(collection);
        if (k == 0) return {};
        std::vector<ScoredDocument> scored;
        scored.reserve(it->second.docs.size());
        for (const auto& doc : it->second.docs)
            scored.push_back({doc, cosine_similarity(query_vector, doc.vector)});
        std::sort(scored.begin(), scored.end(), [](const ScoredDocument& a, const ScoredDocument& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.document.id < b.document.id;
        });
        if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));
        return scored;
    }

    // One JSONL file per collection under dir: {id, text, vector, metadata}.
    void save(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        std::shared_lock lock(mutex_);
        for (const auto& [name, col] : collections_) {
            std::ofstream out(dir / (name + ".jsonl"));
            if (!out) throw Error("io_error", "cannot write collection file for " + name);
            for (const auto& doc : col.docs) {
                nlohmann::json j{{"id", doc.id},
                                 {"text", doc.text},
                                 {"vector", doc.vector},
                                 {"metadata", doc.metadata}};
                out << j.dump() << "\n";
            }
        }
    }

    void load(const std::filesystem::path& dir) {
        if (!std::filesystem::exists(dir)) return;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.path().extension() != ".jsonl") continue;
            const std::string name = entry.path().stem().string();
            std::ifstream in(entry.path());
            std::string line;
            std::unique_lock lock(mutex_);
            auto& col = collections_[name];
            while (std::getline(in, line)) {
                if (trim(line).empty()) continue;
                auto j = nlohmann::json::parse(line);
                Document doc{j.at("id").get<std::string>(), name, j.at("text").get<std::string>(),
                             j.at("vector").get<std::vector<double>>(),
                             j.value("metadata", std::map<std::string, std::string>{})};
                if (col.docs.empty()) col.dimension = doc.vector.size();
                if (!col.by_id.count(doc.id)) {
                    col.by_id[doc.id] = col.docs.size();
                    col.docs.push_back(std::move(doc));
                }
            }
        }
    }

private:
    struct Collection {
        std::size_t dimension = 0;
        std::vector<Document> docs;
        std::map<std::string, std::size_t> by_id;
    };

    Gateway* gateway_;
    std::map<std::string, Collection> collections_;
    mutable std::shared_mutex mutex_;
};

struct CragDiagnostics {
    std::size_t grader_defaults = 0; // grader answered garbage twice, defaulted irrelevant
    std::size_t fallbacks = 0;
};

// Corrective retrieval: grade what the vector store returns; when nothing
// grades relevant, rewrite the query and fall back to web search.
class CragPipeline {
public:
    CragPipeline(Gateway& gateway, VectorStore& store, int default_top_k = 4)
        : gateway_(&gateway), store_(&store), default_top_k_(default_top_k) {}

    // One grading call per document; anything other than an exact
    // relevant/irrelevant verdict is retried once, then defaults to
    // irrelevant (failing toward the fallback, never toward relevance).
    std::vector<GradedDocument> grade_documents(const std::string& query,
                                                const std::vector<Document>& docs) {
        std::vector<GradedDocument> graded;
        graded.reserve(docs.size());
        std::vector<double> query_vector;
        if (!docs.empty()) query_vector = gateway_->embed_text(query);
        for (const auto& doc : docs) {
            GradedDocument g;
            g.document = doc;
            g.score = cosine_similarity(query_vector, doc.vector);
            g.label = grade_one(query, doc);
            graded.push_back(std::move(g));
        }
        return graded;
    }

    // Single-line search query; an empty rewrite falls back to the original.
    std::string rewrite_query(const std::string& query) {
        if (query.empty()) throw EmptyText();
        CompletionRequest request;
        request.system = "You rewrite questions as effective web search queries.";
        request.user = "Rewrite this as a single-line web search query, nothing else:\n" + query;
        request.tag = tags::rewrite_query;
        for (const auto& line : split_lines(gateway_->complete(request))) {
            const std::string candidate = trim(line);
            if (!candidate.empty()) return candidate;
        }
        return query;
    }

    CragAnswer answer_with_crag(const std::string& collection, const std::string& query, int k) {
        if (k < 1) throw std::invalid_argument("k must be positive");
        auto retrieved = store_->retrieve_top_k(collection, query, k);
        std::vector<Document> docs;
        docs.reserve(retrieved.size());
        for (auto& s : retrieved) docs.push_back(std::move(s.document));
        auto graded = grade_documents(query, docs);

        std::vector<const Document*> relevant;
        for (const auto& g : graded)
            if (g.label == GradeLabel::relevant) relevant.push_back(&g.document);

        CragAnswer answer;
        if (!relevant.empty()) {
            answer.route = CragAnswer::Route::internal;
            std::string context;
            for (const auto* doc : relevant) {
                context += "- " + doc->text + "\n";
                answer.used_documents.push_back(doc->id);
            }
            answer.text = synthesize(query, context);
            return answer;
        }

        ++diagnostics_.fallbacks;
        const std::string search_query = rewrite_query(query);
        auto results = gateway_->web_search(search_query, k);
        std::string context;
        for (const auto& r : results) {
            context += "- " + r.title + ": " + r.snippet + " (" + r.url + ")\n";
            answer.used_documents.push_back(r.url);
        }
        answer.route = CragAnswer::Route::web_fallback;
        answer.text = synthesize(query, context);
        return answer;
    }

    CragAnswer answer_with_crag(const std::string& collection, const std::string& query) {
        return answer_with_crag(collection, query, default_top_k_);
    }

    const CragDiagnostics& diagnostics() const { return diagnostics_; }

private:
    GradeLabel grade_one(const std::string& query, const Document& doc) {
        for (int attempt = 0; attempt < 2; ++attempt) {
            CompletionRequest request;
            request.system = "You judge whether a document helps answer a query.";
            request.user = "Query: " + query + "\n\nDocument:\n" + doc.text +
                           "\n\nReply with exactly one word: relevant or irrelevant.";
            request.tag = tags::grade_doc;
            const std::string verdict = to_lower(trim(gateway_->complete(request)));
            if (verdict == "relevant") return GradeLabel::relevant;
            if (verdict == "irrelevant") return GradeLabel::irrelevant;
        }
        ++diagnostics_.grader_defaults;
        return GradeLabel::irrelevant;
    }

    std::string synthesize(const std::string& query, const std::string& context) {
        CompletionRequest request;
        request.system = "You synthesize a grounded answer from the provided material.";
        request.user = "Question: " + query + "\n\nMaterial:\n" +
                       (context.empty() ? std::string("(none)\n") : context) +
                       "\nWrite a concise, accurate answer based on the material.";
        request.tag = tags::synthesize;
        return gateway_->complete(request);
    }

    Gateway* gateway_;
    VectorStore* store_;
    int default_top_k_;
    CragDiagnostics diagnostics_;
};

} // namespace agora
