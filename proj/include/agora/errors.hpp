#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agora {

// Base class for every domain error. The CLI maps these to exit code 1;
// usage errors (bad flags, unknown subcommand) exit 2 instead.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    // Stable machine-readable identifier, e.g. "script_exhausted".
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct ConfigInvalid : Error {
    explicit ConfigInvalid(const std::string& detail)
        : Error("config_invalid", "invalid session config: " + detail) {}
};

struct ScenarioInvalid : Error {
    explicit ScenarioInvalid(const std::string& detail)
        : Error("scenario_invalid", "invalid scenario: " + detail) {}
};

struct GatewayFailure : Error {
    explicit GatewayFailure(const std::string& detail)
        : Error("gateway_failure", "gateway failure: " + detail) {}
};

struct ScriptExhausted : Error {
    explicit ScriptExhausted(const std::string& tag_)
        : Error("script_exhausted", "scripted backend has no remaining entry for tag '" + tag_ + "'"),
          tag(tag_) {}
    std::string tag;
};

struct EmptyText : Error {
    EmptyText() : Error("empty_text", "text must be non-empty") {}
};

struct SearchUnavailable : Error {
    explicit SearchUnavailable(const std::string& detail = "no search client configured")
        : Error("search_unavailable", "web search unavailable: " + detail) {}
};

struct MalformedBossDirective : Error {
    explicit MalformedBossDirective(const std::string& detail)
        : Error("malformed_boss_directive", "malformed boss directive: " + detail) {}
};

struct MissingSection : Error {
    explicit MissingSection(const std::string& section_)
        : Error("missing_section", "missing section header '" + section_ + "'"), section(section_) {}
    std::string section;
};

struct OutOfOrderSections : Error {
    OutOfOrderSections()
        : Error("out_of_order_sections",
                "section headers present but out of order (expected My Beliefs, Response, Future Work)") {}
};

struct AllSlotsUnbound : Error {
    AllSlotsUnbound() : Error("all_slots_unbound", "triple pattern must bind at least one slot") {}
};

struct UnknownCollection : Error {
    explicit UnknownCollection(const std::string& name_)
        : Error("unknown_collection", "unknown collection '" + name_ + "'"), name(name_) {}
    std::string name;
};

struct DimensionMismatch : Error {
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension_mismatch",
                "embedding dimension " + std::to_string(got) + " does not match collection dimension " +
                    std::to_string(expected)) {}
};

struct UnknownAuthor : Error {
    explicit UnknownAuthor(const std::string& agent_id)
        : Error("unknown_author", "message author '" + agent_id + "' is not a team member") {}
};

// --- ASP engine errors -----------------------------------------------------

// Carries a position and an expected-token hint; the what() text is fed back
// verbatim to the translator on retry.
struct AspSyntaxError : Error {
    AspSyntaxError(int line_, int column_, const std::string& detail_)
        : Error("asp_syntax_error",
                "syntax error at " + std::to_string(line_) + ":" + std::to_string(column_) + ": " + detail_),
          line(line_), column(column_), detail(detail_) {}
    int line;
    int column;
    std::string detail;
};

struct AspSafetyError : Error {
    AspSafetyError(std::size_t rule_index_, const std::string& variable_)
        : Error("asp_safety_violation",
                "safety violation in rule " + std::to_string(rule_index_ + 1) + ": variable " + variable_ +
                    " does not occur in the positive body"),
          rule_index(rule_index_), variable(variable_) {}
    std::size_t rule_index;
    std::string variable;
};

struct GroundingTooLarge : Error {
    explicit GroundingTooLarge(unsigned long long estimated_atoms_)
        : Error("grounding_too_large",
                "grounding would produce about " + std::to_string(estimated_atoms_) +
                    " rule instances, over the configured cap"),
          estimated_atoms(estimated_atoms_) {}
    unsigned long long estimated_atoms;
};

struct UniverseTooLarge : Error {
    explicit UniverseTooLarge(std::size_t atom_count_)
        : Error("universe_too_large",
                "ground atom universe of " + std::to_string(atom_count_) +
                    " atoms exceeds the exhaustive enumerator cap"),
          atom_count(atom_count_) {}
    std::size_t atom_count;
};

struct TranslationFailed : Error {
    TranslationFailed(int attempts_, const std::string& last_error_)
        : Error("translation_failed",
                "translation to a valid logic program failed after " + std::to_string(attempts_) +
                    " attempts; last error: " + last_error_),
          attempts(attempts_), last_error(last_error_) {}
    int attempts;
    std::string last_error;
};

} // namespace agora
