#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "agora/errors.hpp"
#include "agora/gateway.hpp"
#include "agora/protocol.hpp"
#include "agora/solver_loop.hpp"
#include "agora/triples.hpp"
#include "agora/util.hpp"

#include "json.hpp"

namespace agora {

// In-memory property graph of subject-predicate-object edges. Concurrent
// readers, exclusive writer; inserts are all-or-nothing per batch. A graph
// database adapter can replace this behind the same interface.
class TripleStore {
public:
    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return triples_.size();
    }

    bool contains(const KnowledgeTriple& t) const {
        std::shared_lock lock(mutex_);
        return keys_.count(t.fact_key()) > 0;
    }

    // Normalizes tokens, drops triples with an empty component, skips
    // duplicates (against the store and within the batch), and returns what
    // was actually inserted.
    std::vector<KnowledgeTriple> insert_batch(std::vector<KnowledgeTriple> batch) {
        std::unique_lock lock(mutex_);
        std::vector<KnowledgeTriple> inserted;
        for (auto& t : batch) {
            t.subject = normalize_token(t.subject);
            t.predicate = normalize_token(t.predicate);
            t.object = normalize_token(t.object);
            if (t.subject.empty() || t.predicate.empty() || t.object.empty()) continue;
            if (!keys_.insert(std::make_tuple(t.subject, t.predicate, t.object)).second) continue;
            triples_.push_back(t);
            inserted.push_back(t);
        }
        return inserted;
    }

    // All triples matching every bound slot, ordered by
    // (source_turn, subject, predicate, object).
    std::vector<KnowledgeTriple> select(const TriplePattern& pattern) const {
        if (!pattern.any_bound()) throw AllSlotsUnbound();
        std::shared_lock lock(mutex_);
        std::vector<KnowledgeTriple> out;
        for (const auto& t : triples_)
            if (pattern.matches(t)) out.push_back(t);
        sort_canonical(out);
        return out;
    }

    std::vector<KnowledgeTriple> dump() const {
        std::shared_lock lock(mutex_);
        auto out = triples_;
        sort_canonical(out);
        return out;
    }

    void save_jsonl(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw Error("io_error", "cannot write " + path.string());
        for (const auto& t : dump()) {
            nlohmann::json j{{"subject", t.subject},
                             {"predicate", t.predicate},
                             {"object", t.object},
                             {"source_turn", t.source_turn},
                             {"source_agent", t.source_agent}};
            out << j.dump() << "\n";
        }
    }

    // Merges the file into the store (dedup applies as usual).
    void load_jsonl(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error("io_error", "cannot read " + path.string());
        std::vector<KnowledgeTriple> batch;
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto j = nlohmann::json::parse(line);
            batch.push_back({j.at("subject").get<std::string>(), j.at("predicate").get<std::string>(),
                             j.at("object").get<std::string>(), j.value("source_turn", 0),
                             j.value("source_agent", "")});
        }
        insert_batch(std::move(batch));
    }

private:
    static void sort_canonical(std::vector<KnowledgeTriple>& v) {
        std::sort(v.begin(), v.end(), [](const KnowledgeTriple& a, const KnowledgeTriple& b) {
            return std::tie(a.source_turn, a.subject, a.predicate, a.object) <
                   std::tie(b.source_turn, b.subject, b.predicate, b.object);
        });
    }

    std::vector<KnowledgeTriple> triples_;
    std::set<std::tuple<std::string, std::string, std::string>> keys_;
    mutable std::shared_mutex mutex_;
};

struct KbAnswer {
    enum class Source { graph, solver, unknown };
    std::string text;
    Source source = Source::unknown;
    std::size_t rows_found = 0;
    std::string diagnostic; // retained failure detail on the unknown path
};

inline std::string to_string(KbAnswer::Source s) {
    switch (s) {
    case KbAnswer::Source::graph: return "graph";
    case KbAnswer::Source::solver: return "solver";
    case KbAnswer::Source::unknown: return "unknown";
    }
    return "unknown";
}

inline constexpr const char* kInsufficientKnowledgeText =
    "The knowledge base has insufficient knowledge to answer this question.";

// Parses the structured-pattern reply of the nl_to_pattern call. Accepted
// shape: whitespace-separated `subject=...`, `predicate=...`, `object=...`
// pairs; '?', '*', or an omitted key leave a slot unbound.
inline TriplePattern parse_pattern_reply(const std::string& reply) {
    TriplePattern pattern;
    for (const auto& line : split_lines(reply)) {
        std::string current;
        auto flush = [&]() {
            if (current.empty()) return;
            auto eq = current.find('=');
            if (eq != std::string::npos) {
                std::string key = to_lower(trim(current.substr(0, eq)));
                std::string value = normalize_token(current.substr(eq + 1));
                if (!value.empty() && value != "?" && value != "*") {
                    if (key == "subject") pattern.subject = value;
                    else if (key == "predicate") pattern.predicate = value;
                    else if (key == "object") pattern.object = value;
                }
            }
            current.clear();
        };
        for (char c : line) {
            if (c == ' ' || c == '\t') flush();
            else current += c;
        }
        flush();
    }
    return pattern;
}

struct KbDiagnostics {
    std::size_t extraction_lines_skipped = 0;
    std::size_t solver_invocations = 0;
    std::size_t translation_failures = 0;
};

// The conversation-facing knowledge base: extraction into the triple store,
// structured retrieval, and the threshold fallback onto the logic solver.
class KnowledgeBase {
public:
    explicit KnowledgeBase(Gateway& gateway) : gateway_(&gateway) {}
    virtual ~KnowledgeBase() = default;

    // Runs triple extraction over a worker turn and ingests the result.
    // Unparseable extraction lines are skipped and counted, never fatal.
    virtual std::vector<KnowledgeTriple> add_to_kb(const Message& message) {
        if (message.kind != MessageKind::worker_turn)
            throw std::invalid_argument("add_to_kb requires a worker_turn message");
        CompletionRequest request;
        request.system = "You extract factual relations from a teammate's message.";
        request.user =
            "Extract the factual statements from the message below as relations, one per "
            "line, in the exact form:\nsubject | predicate | object\nUse short noun phrases. "
            "Output only those lines, or nothing if there are no facts.\n\nMessage from " +
            message.agent_id + ":\n" + message.raw_text;
        request.tag = tags::extract_triples;
        const std::string reply = gateway_->complete(request);

        std::vector<KnowledgeTriple> batch;
        for (const auto& line : split_lines(reply)) {
            if (trim(line).empty()) continue;
            auto parts = split(line, '|');
            if (parts.size() != 3) {
                ++diagnostics_.extraction_lines_skipped;
                continue;
            }
            KnowledgeTriple t{normalize_token(parts[0]), normalize_token(parts[1]),
                              normalize_token(parts[2]), message.turn_index, message.agent_id};
            if (t.subject.empty() || t.predicate.empty() || t.object.empty()) {
                ++diagnostics_.extraction_lines_skipped;
                continue;
            }
            batch.push_back(std::move(t));
        }
        return store_.insert_batch(std::move(batch));
    }

    std::vector<KnowledgeTriple> graph_select(const TriplePattern& pattern) const {
        return store_.select(pattern);
    }

    // NL question -> structured pattern -> graph rows; below the row
    // threshold the matched rows and the question fall through to the
    // solver pipeline.
    virtual KbAnswer query_knowledge_base(const std::string& question, int threshold) {
        if (question.empty()) throw std::invalid_argument("question must be non-empty");
        if (threshold < 1) throw std::invalid_argument("threshold must be positive");

        CompletionRequest request;
        request.system = "You turn a question into a structured graph pattern.";
        request.user =
            "Map the question to a subject/predicate/object pattern over a knowledge graph. "
            "Reply with one line of `key=value` pairs using keys subject, predicate, object; "
            "use ? for a slot the question leaves open. Values are lowercase tokens with "
            "underscores.\n\nQuestion: " + question;
        request.tag = tags::nl_to_pattern;
        const TriplePattern pattern = parse_pattern_reply(gateway_->complete(request));

        std::vector<KnowledgeTriple> rows;
        if (pattern.any_bound()) rows = store_.select(pattern);

        KbAnswer answer;
        answer.rows_found = rows.size();
        if (rows.size() >= static_cast<std::size_t>(threshold)) {
            answer.source = KbAnswer::Source::graph;
            answer.text = rows_to_natural_language(rows, question);
            return answer;
        }

        ++diagnostics_.solver_invocations;
        try {
            SolveOutcome outcome = solve_with_retry(*gateway_, question, rows);
            if (outcome.models.models.empty()) {
                answer.source = KbAnswer::Source::unknown;
                answer.text = kInsufficientKnowledgeText;
                return answer;
            }
            answer.source = KbAnswer::Source::solver;
            answer.text = answer_from_models(*gateway_, outcome.models, question);
            return answer;
        } catch (const TranslationFailed& e) {
            ++diagnostics_.translation_failures;
            answer.source = KbAnswer::Source::unknown;
            answer.text = kInsufficientKnowledgeText;
            answer.diagnostic = e.what();
            return answer;
        }
    }

    TripleStore& store() { return store_; }
    const TripleStore& store() const { return store_; }
    const KbDiagnostics& diagnostics() const { return diagnostics_; }

private:
    std::string rows_to_natural_language(const std::vector<KnowledgeTriple>& rows,
                                         const std::string& question) {
        std::string facts;
        for (const auto& t : rows)
            facts += "(" + t.subject + ", " + t.predicate + ", " + t.object + ")\n";
        CompletionRequest request;
        request.system = "You summarize graph facts as a direct answer.";
        request.user = "Question: " + question + "\n\nMatching facts from the knowledge graph:\n" +
                       facts + "\nAnswer the question in one or two sentences using these facts.";
        request.tag = tags::rows_to_nl;
        return gateway_->complete(request);
    }

    Gateway* gateway_;
    TripleStore store_;
    KbDiagnostics diagnostics_;
};

} // namespace agora
