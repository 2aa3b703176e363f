#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>

namespace agora {

// Lowercases and joins internal whitespace runs with underscores, so that
// entities extracted from conversation line up with logic-program constants.
inline std::string normalize_token(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_gap = false;
    for (char ch : raw) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            if (!out.empty()) pending_gap = true;
            continue;
        }
        if (pending_gap) {
            out += '_';
            pending_gap = false;
        }
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

// One conversation-derived fact: a graph edge with turn provenance.
struct KnowledgeTriple {
    std::string subject;
    std::string predicate;
    std::string object;
    int source_turn = 0;
    std::string source_agent;

    // Identity for dedup ignores provenance.
    auto fact_key() const { return std::tie(subject, predicate, object); }

    bool operator==(const KnowledgeTriple&) const = default;
};

// Renders a triple as a candidate logic fact, e.g. depends_on(a,b).
inline std::string render_fact(const KnowledgeTriple& t) {
    return t.predicate + "(" + t.subject + "," + t.object + ").";
}

struct TriplePattern {
    std::optional<std::string> subject;
    std::optional<std::string> predicate;
    std::optional<std::string> object;

    bool any_bound() const { return subject || predicate || object; }

    bool matches(const KnowledgeTriple& t) const {
        if (subject && *subject != t.subject) return false;
        if (predicate && *predicate != t.predicate) return false;
        if (object && *object != t.object) return false;
        return true;
    }
};

} // namespace agora
