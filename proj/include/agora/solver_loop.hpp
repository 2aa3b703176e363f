#pragma once

#include <string>
#include <vector>

#include "agora/asp.hpp"
#include "agora/errors.hpp"
#include "agora/gateway.hpp"
#include "agora/triples.hpp"

namespace agora {

// The concrete grammar embedded in translation prompts; it is exactly what
// parse_asp accepts, so a compliant reply validates on the first attempt.
inline std::string asp_grammar_help() {
    return "Write a logic program, one statement per line, using only this grammar:\n"
           "  fact.\n"
           "  head :- literal, literal, ... .\n"
           "A literal is an atom or 'not' followed by an atom. An atom is a lowercase\n"
           "predicate, optionally with parenthesized arguments. Arguments are lowercase\n"
           "constants or capitalized variables. Every variable in a rule head or behind\n"
           "'not' must also appear in a positive body literal. '%' starts a comment.\n"
           "No arithmetic, no aggregates, no disjunction.";
}

inline constexpr int kTranslationAttempts = 3;

// One translation call. Context triples are rendered as candidate facts; the
// reply is raw candidate source and validating it is the caller's job.
inline std::string nl_to_asp(Gateway& gateway, const std::string& question,
                             const std::vector<KnowledgeTriple>& context,
                             const std::string& previous_error = {}) {
    std::string user = "Question: " + question + "\n\n";
    if (!context.empty()) {
        user += "Known facts you may use:\n";
        for (const auto& t : context) user += render_fact(t) + "\n";
        user += "\n";
    }
    user += asp_grammar_help();
    user += "\n\nTranslate the question and the relevant facts into a logic program whose "
            "stable models answer the question. Reply with the program only.";
    if (!previous_error.empty())
        user += "\n\nYour previous attempt was rejected: " + previous_error +
                "\nProduce a corrected program.";
    CompletionRequest request;
    request.system = "You translate natural-language questions into logic programs.";
    request.user = user;
    request.tag = tags::nl_to_asp;
    return gateway.complete(request);
}

struct SolveOutcome {
    asp::StableModelSet models;
    asp::Program program; // the grounded program that was solved
    int attempts = 0;
};

// Translate, validate, solve; up to three attempts, feeding each syntax or
// safety error back into the next translation prompt.
inline SolveOutcome solve_with_retry(Gateway& gateway, const std::string& question,
                                     const std::vector<KnowledgeTriple>& context) {
    std::string last_error;
    for (int attempt = 1; attempt <= kTranslationAttempts; ++attempt) {
        const std::string source = nl_to_asp(gateway, question, context, last_error);
        try {
            asp::Program program = asp::ground(asp::parse_asp(source));
            SolveOutcome outcome;
            outcome.models = asp::stable_models(program);
            outcome.program = std::move(program);
            outcome.attempts = attempt;
            return outcome;
        } catch (const AspSyntaxError& e) {
            last_error = e.what();
        } catch (const AspSafetyError& e) {
            last_error = e.what();
        }
    }
    throw TranslationFailed(kTranslationAttempts, last_error);
}

// Renders the model set back into natural language via the gateway. An empty
// model set short-circuits to its fixed rendering; there is nothing for a
// model to translate.
inline std::string answer_from_models(Gateway& gateway, const asp::StableModelSet& models,
                                      const std::string& question) {
    const std::string rendered = asp::render_models(models);
    if (models.models.empty()) return rendered;
    CompletionRequest request;
    request.system = "You turn logic-solver output into a plain, direct answer.";
    request.user = "Question: " + question + "\n\nStable models (one per line, each a set of "
                   "derived facts):\n" + rendered +
                   "\n\nAnswer the question in one or two sentences based only on these facts.";
    request.tag = tags::models_to_nl;
    return gateway.complete(request);
}

} // namespace agora
