#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agora/errors.hpp"
#include "agora/util.hpp"

namespace agora {

struct AgentProfile {
    std::string id;
    std::string display_name;
    std::string role_title;
    std::string system_prompt;
    bool is_boss = false;
    std::string rag_collection; // empty when the agent has no private corpus
    std::vector<std::string> responsibilities;
};

enum class MessageKind { worker_turn, boss_directive, conclusion };

inline std::string to_string(MessageKind k) {
    switch (k) {
    case MessageKind::worker_turn: return "worker_turn";
    case MessageKind::boss_directive: return "boss_directive";
    case MessageKind::conclusion: return "conclusion";
    }
    return "worker_turn";
}

inline MessageKind message_kind_from_string(std::string_view s) {
    if (s == "worker_turn") return MessageKind::worker_turn;
    if (s == "boss_directive") return MessageKind::boss_directive;
    if (s == "conclusion") return MessageKind::conclusion;
    throw Error("bad_message_kind", "unknown message kind '" + std::string(s) + "'");
}

// One agent turn. Worker turns carry the three protocol sections; boss
// directives and conclusions keep their payload in `response`.
struct Message {
    int turn_index = 0;
    std::string agent_id;
    std::string beliefs;
    std::string response;
    std::string future_work;
    std::string raw_text;
    MessageKind kind = MessageKind::worker_turn;
    std::string phase;     // session phase at emission time
    std::string timestamp; // ISO-8601 UTC, stamped by the session loop
};

inline constexpr std::string_view kBeliefsHeader = "My Beliefs:";
inline constexpr std::string_view kResponseHeader = "Response:";
inline constexpr std::string_view kFutureWorkHeader = "Future Work:";

// The output-format instruction appended to every worker prompt; compliance
// with the exact headers is what makes parsing deterministic.
inline std::string section_format_instruction() {
    return "Structure your entire reply as exactly three sections introduced by these "
           "header lines, in this order, each header alone on its own line:\n"
           "My Beliefs:\n"
           "Response:\n"
           "Future Work:";
}

namespace detail {
// A header matches only as a full line (trailing whitespace tolerated).
inline bool is_header_line(const std::string& line, std::string_view header) {
    if (line.size() < header.size() || std::string_view(line).substr(0, header.size()) != header)
        return false;
    return trim(line.substr(header.size())).empty();
}
} // namespace detail

// Extracts the three sections by exact, case-sensitive, line-anchored
// headers in canonical order. Text before the first header is tolerated
// (models preface replies); section bodies are whitespace-trimmed.
inline Message parse_agent_message(const std::string& raw, const std::string& agent_id,
                                   int turn_index) {
    if (raw.empty()) throw Error("empty_message", "agent message is empty");
    const std::vector<std::string> lines = split_lines(raw);
    const std::string_view headers[3] = {kBeliefsHeader, kResponseHeader, kFutureWorkHeader};
    const char* names[3] = {"beliefs", "response", "future_work"};

    std::ptrdiff_t at[3] = {-1, -1, -1};
    for (std::size_t li = 0; li < lines.size(); ++li)
        for (int h = 0; h < 3; ++h)
            if (at[h] < 0 && detail::is_header_line(lines[li], headers[h]))
                at[h] = static_cast<std::ptrdiff_t>(li);

    for (int h = 0; h < 3; ++h)
        if (at[h] < 0) throw MissingSection(names[h]);
    if (!(at[0] < at[1] && at[1] < at[2])) throw OutOfOrderSections();

    auto body = [&lines](std::ptrdiff_t from, std::ptrdiff_t to) {
        std::vector<std::string> slice(lines.begin() + from + 1, lines.begin() + to);
        return trim(join(slice, "\n"));
    };

    Message m;
    m.turn_index = turn_index;
    m.agent_id = agent_id;
    m.kind = MessageKind::worker_turn;
    m.raw_text = raw;
    m.beliefs = body(at[0], at[1]);
    m.response = body(at[1], at[2]);
    m.future_work = body(at[2], static_cast<std::ptrdiff_t>(lines.size()));
    return m;
}

// Canonical rendering of the three sections; parsing this back reproduces
// the section texts byte-for-byte (for bodies that are themselves trimmed
// and contain no header lines).
inline std::string render_three_sections(const std::string& beliefs, const std::string& response,
                                         const std::string& future_work) {
    std::string out;
    out += kBeliefsHeader;
    out += "\n" + beliefs + "\n";
    out += kResponseHeader;
    out += "\n" + response + "\n";
    out += kFutureWorkHeader;
    out += "\n" + future_work;
    return out;
}

// --- Boss directives -----------------------------------------------------------

// What the boss decided: hand a task to a worker or wrap up the session.
struct NextAction {
    enum class Kind { assign, conclude };
    Kind kind = Kind::assign;
    std::string assignee;       // assign only
    std::string task_statement; // assign only
    std::string summary;        // conclude only
    std::optional<std::string> phase;
};

inline std::string directive_format_instruction(const std::vector<AgentProfile>& team,
                                                const std::vector<std::string>& phase_labels) {
    std::string workers;
    for (const auto& p : team)
        if (!p.is_boss) workers += (workers.empty() ? "" : ", ") + p.id;
    std::string out =
        "Decide the next step and reply with exactly one directive line:\n"
        "ASSIGN <agent_id> :: <task>\n"
        "or\n"
        "CONCLUDE :: <summary>\n"
        "Valid agent ids: " + workers + ".";
    if (!phase_labels.empty()) {
        out += "\nYou may precede the directive with a line 'PHASE <label>' to advance the phase. "
               "Labels in order: " + join(phase_labels, ", ") + ".";
    }
    return out;
}

// Fixed grammar, first matching line wins:
//   [PHASE <label>]
//   ASSIGN <agent_id> :: <task>  |  CONCLUDE :: <summary>
// Non-matching lines are ignored so models may preface the directive.
inline NextAction parse_boss_directive(const std::string& raw) {
    NextAction action;
    std::optional<std::string> phase;
    for (const auto& raw_line : split_lines(raw)) {
        const std::string line = trim(raw_line);
        if (line.empty()) continue;
        if (!phase && line.rfind("PHASE ", 0) == 0) {
            std::string label = trim(line.substr(6));
            if (!label.empty()) phase = label;
            continue;
        }
        if (line.rfind("ASSIGN ", 0) == 0) {
            auto sep = line.find("::");
            if (sep == std::string::npos)
                throw MalformedBossDirective("ASSIGN line is missing the '::' separator: " + line);
            std::string assignee = trim(line.substr(7, sep - 7));
            std::string task = trim(line.substr(sep + 2));
            if (assignee.empty())
                throw MalformedBossDirective("ASSIGN line has no agent id: " + line);
            if (task.empty())
                throw MalformedBossDirective("ASSIGN line has an empty task statement: " + line);
            action.kind = NextAction::Kind::assign;
            action.assignee = assignee;
            action.task_statement = task;
            action.phase = phase;
            return action;
        }
        if (line.rfind("CONCLUDE", 0) == 0) {
            auto sep = line.find("::");
            if (sep == std::string::npos)
                throw MalformedBossDirective("CONCLUDE line is missing the '::' separator: " + line);
            action.kind = NextAction::Kind::conclude;
            action.summary = trim(line.substr(sep + 2));
            action.phase = phase;
            return action;
        }
    }
    throw MalformedBossDirective("no line matched 'ASSIGN <agent_id> :: <task>' or 'CONCLUDE :: <summary>'");
}

} // namespace agora
