#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "agora/errors.hpp"
#include "agora/gateway.hpp"
#include "agora/protocol.hpp"

namespace agora {

// Summaries are capped so long sessions do not bloat every prompt; the model
// is instructed to stay short and overflow is hard-truncated.
inline constexpr std::size_t kBeliefSummaryMaxChars = 400;

struct InferredBelief {
    std::string summary;
    int last_updated_turn = 0;
};

// One agent's view of the collaboration: an introspective self-summary plus
// a first-order inference about each teammate that has been observed.
struct BeliefState {
    std::string agent_id;
    std::string self_summary;
    std::map<std::string, InferredBelief> others; // never contains agent_id
    int updated_at_turn = -1;
};

inline BeliefState initial_belief_state(const std::string& agent_id) {
    BeliefState state;
    state.agent_id = agent_id;
    return state;
}

// Folds one observed message into the owner's belief state. Exactly one slot
// changes per call: the self-summary when the owner spoke, otherwise the
// entry for the message's author.
inline BeliefState update_belief_state(Gateway& gateway, const BeliefState& prior,
                                       const Message& new_message,
                                       const std::vector<AgentProfile>& team) {
    const AgentProfile* author = nullptr;
    for (const auto& p : team)
        if (p.id == new_message.agent_id) author = &p;
    if (!author) throw UnknownAuthor(new_message.agent_id);

    const bool own_message = new_message.agent_id == prior.agent_id;
    CompletionRequest request;
    request.system = "You maintain an agent's working model of a team conversation.";
    request.user =
        std::string("You are tracking beliefs for agent '") + prior.agent_id + "'.\n" +
        (own_message
             ? "Summarize this agent's own current state and intentions based on its latest message."
             : "Infer what teammate '" + new_message.agent_id +
                   "' (" + author->role_title + ") currently knows, wants, and plans, based on their "
                   "latest message.") +
        "\nKeep it under " + std::to_string(kBeliefSummaryMaxChars) + " characters, one plain sentence "
        "or two.\n\nPrior self-summary: " +
        (prior.self_summary.empty() ? "(none)" : prior.self_summary) + "\n\nLatest message (from " +
        new_message.agent_id + "):\n" + new_message.raw_text;
    request.tag = tags::update_beliefs;

    std::string summary = trim(gateway.complete(request));
    if (summary.size() > kBeliefSummaryMaxChars) summary.resize(kBeliefSummaryMaxChars);

    BeliefState next = prior;
    if (own_message)
        next.self_summary = summary;
    else
        next.others[new_message.agent_id] = {summary, new_message.turn_index};
    next.updated_at_turn = new_message.turn_index;
    return next;
}

// Deterministic "My Beliefs" block: the self line first, then one line per
// teammate in team declaration order. Empty entries are omitted; entries for
// ids no longer on the team are dropped and counted.
inline std::string render_beliefs_block(const BeliefState& state,
                                        const std::vector<AgentProfile>& team,
                                        std::size_t* dropped_entries = nullptr) {
    std::vector<std::string> lines;
    if (!state.self_summary.empty()) lines.push_back("About my work: " + state.self_summary);
    std::size_t rendered = 0;
    for (const auto& profile : team) {
        auto it = state.others.find(profile.id);
        if (it == state.others.end() || it->second.summary.empty()) continue;
        lines.push_back("About " + profile.display_name + ": " + it->second.summary);
        ++rendered;
    }
    // Anything left in `others` belongs to an agent missing from the team.
    std::size_t nonempty = 0;
    for (const auto& [id, belief] : state.others)
        if (!belief.summary.empty()) ++nonempty;
    if (dropped_entries && nonempty > rendered) *dropped_entries += nonempty - rendered;
    return join(lines, "\n");
}

} // namespace agora
