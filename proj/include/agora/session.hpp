#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agora/beliefs.hpp"
#include "agora/crag.hpp"
#include "agora/errors.hpp"
#include "agora/gateway.hpp"
#include "agora/knowledge.hpp"
#include "agora/protocol.hpp"
#include "agora/util.hpp"

#include "json.hpp"

namespace agora {

struct SessionConfig {
    std::vector<AgentProfile> agents;
    int turn_budget = 24;
    bool kb_enabled = true;
    int kb_threshold = 2;
    int rag_top_k = 4;
    std::vector<std::string> phase_labels;
    bool emit_belief_sidecar = true;

    const AgentProfile& boss() const {
        for (const auto& p : agents)
            if (p.is_boss) return p;
        throw ConfigInvalid("no boss agent");
    }

    const AgentProfile* find(const std::string& id) const {
        for (const auto& p : agents)
            if (p.id == id) return &p;
        return nullptr;
    }

    void validate() const {
        if (agents.empty()) throw ConfigInvalid("team is empty");
        std::size_t bosses = 0;
        std::set<std::string> ids;
        for (const auto& p : agents) {
            if (p.id.empty()) throw ConfigInvalid("agent with empty id");
            if (!ids.insert(p.id).second) throw ConfigInvalid("duplicate agent id '" + p.id + "'");
            if (p.system_prompt.empty())
                throw ConfigInvalid("agent '" + p.id + "' has an empty system prompt");
            if (p.is_boss) ++bosses;
        }
        if (bosses != 1)
            throw ConfigInvalid("team must have exactly one boss, found " + std::to_string(bosses));
        if (agents.size() < 2) throw ConfigInvalid("team needs at least one worker");
        if (turn_budget < 1) throw ConfigInvalid("turn budget must be at least 1");
        if (kb_threshold < 1) throw ConfigInvalid("kb threshold must be positive");
    }
};

enum class SessionEnd { concluded, budget_exhausted };

struct Transcript {
    std::vector<Message> messages;
    SessionEnd ended_by = SessionEnd::concluded;
};

struct SessionState {
    const SessionConfig* config = nullptr;
    Transcript transcript;
    std::string phase_label;
    int turn_budget_remaining = 0;
    std::map<std::string, BeliefState> beliefs;
    std::string current_task;
    std::string latest_future_work;
};

struct SessionDiagnostics {
    std::size_t worker_turns = 0;
    std::size_t malformed_worker_messages = 0;
    std::size_t boss_parse_retries = 0;
    std::size_t belief_entries_dropped = 0;
    std::size_t rag_collections_missing = 0;

    double sections_well_formed_ratio() const {
        if (worker_turns == 0) return 1.0;
        return static_cast<double>(worker_turns - malformed_worker_messages) /
               static_cast<double>(worker_turns);
    }
};

struct SessionResult {
    Transcript transcript;
    std::map<std::string, BeliefState> beliefs;
    SessionDiagnostics diagnostics;
    // Author belief snapshots keyed by turn_index, serialized into the
    // transcript when the sidecar is enabled.
    std::map<int, nlohmann::json> belief_sidecars;
};

// --- Prompt assembly ---------------------------------------------------------

// Deterministic worker prompt: role prompt, belief block, the task, optional
// knowledge-base and retrieval answers, then the mandatory format instruction.
inline std::string render_agent_prompt(const AgentProfile& profile, const SessionState& state,
                                       const std::string& task, const BeliefState& beliefs,
                                       const std::optional<std::string>& kb_answer = std::nullopt,
                                       const std::optional<std::string>& rag_answer = std::nullopt) {
    std::string out = profile.system_prompt + "\n\n";
    const std::string belief_block =
        render_beliefs_block(beliefs, state.config ? state.config->agents
                                                   : std::vector<AgentProfile>{});
    if (!belief_block.empty()) out += "Current beliefs:\n" + belief_block + "\n\n";
    if (!state.phase_label.empty()) out += "Current phase: " + state.phase_label + "\n\n";
    out += "Your task: " + task + "\n\n";
    if (kb_answer) out += "Knowledge base: " + *kb_answer + "\n\n";
    if (rag_answer) out += "Reference material: " + *rag_answer + "\n\n";
    out += section_format_instruction();
    return out;
}

inline std::string render_boss_prompt(const SessionState& state, const std::string& task,
                                      const std::string& parse_feedback = {}) {
    const SessionConfig& config = *state.config;
    std::string out = config.boss().system_prompt + "\n\n";
    out += "Overall task: " + task + "\n\n";
    out += "Team:\n";
    for (const auto& p : config.agents)
        if (!p.is_boss) out += "- " + p.id + ": " + p.role_title + "\n";
    out += "\n";
    if (!state.phase_label.empty()) out += "Current phase: " + state.phase_label + "\n\n";
    out += "Messages so far: " + std::to_string(state.transcript.messages.size()) + "\n";
    if (!state.transcript.messages.empty()) {
        const Message& last = state.transcript.messages.back();
        if (last.kind == MessageKind::worker_turn)
            out += "Latest response from " + last.agent_id + ":\n" + last.response + "\n";
    }
    if (!state.latest_future_work.empty())
        out += "\nLatest future work:\n" + state.latest_future_work + "\n";
    out += "\n" + directive_format_instruction(config.agents, config.phase_labels);
    if (!parse_feedback.empty())
        out += "\n\nYour previous directive was rejected: " + parse_feedback + "\nIssue a corrected directive.";
    return out;
}

// --- Boss control ------------------------------------------------------------

inline constexpr int kBossParseAttempts = 3;

namespace detail {
inline int phase_index(const std::vector<std::string>& labels, const std::string& label) {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<int>(i);
    return -1;
}

// Grammar-level parse plus team validation: unknown or boss assignees and
// unknown or backward phase labels all count as parse failures, so the boss
// gets the error and a retry.
inline NextAction validate_directive(const std::string& raw, const SessionState& state) {
    const SessionConfig& config = *state.config;
    NextAction action = parse_boss_directive(raw);
    if (action.kind == NextAction::Kind::assign) {
        const AgentProfile* assignee = config.find(action.assignee);
        if (!assignee)
            throw MalformedBossDirective("unknown agent id '" + action.assignee + "'");
        if (assignee->is_boss)
            throw MalformedBossDirective("the boss cannot assign work to itself");
    }
    if (action.phase) {
        const int next = phase_index(config.phase_labels, *action.phase);
        if (next < 0) throw MalformedBossDirective("unknown phase label '" + *action.phase + "'");
        const int current = state.phase_label.empty()
                                ? 0
                                : phase_index(config.phase_labels, state.phase_label);
        if (next < current)
            throw MalformedBossDirective("phase '" + *action.phase +
                                         "' would move backward from '" + state.phase_label + "'");
    }
    return action;
}
} // namespace detail

// Asks the boss for the next step and parses the reply against the directive
// grammar, re-prompting with the parse error up to three attempts.
inline NextAction boss_next_action(Gateway& gateway, const SessionState& state,
                                   std::string* raw_out = nullptr,
                                   SessionDiagnostics* diagnostics = nullptr) {
    std::string feedback;
    for (int attempt = 1; attempt <= kBossParseAttempts; ++attempt) {
        CompletionRequest request;
        request.system = state.config->boss().system_prompt;
        request.user = render_boss_prompt(state, state.current_task, feedback);
        request.tag = tags::boss_directive;
        const std::string raw = gateway.complete(request);
        try {
            NextAction action = detail::validate_directive(raw, state);
            if (raw_out) *raw_out = raw;
            return action;
        } catch (const MalformedBossDirective& e) {
            feedback = e.what();
            if (diagnostics && attempt < kBossParseAttempts) ++diagnostics->boss_parse_retries;
        }
    }
    throw MalformedBossDirective("giving up after " + std::to_string(kBossParseAttempts) +
                                 " attempts; last error: " + feedback);
}

// --- Session loop ------------------------------------------------------------

namespace detail {
inline nlohmann::json belief_state_json(const BeliefState& state) {
    nlohmann::json others = nlohmann::json::object();
    for (const auto& [id, belief] : state.others)
        others[id] = {{"summary", belief.summary}, {"last_updated_turn", belief.last_updated_turn}};
    return {{"agent_id", state.agent_id},
            {"self_summary", state.self_summary},
            {"others", others},
            {"updated_at_turn", state.updated_at_turn}};
}
} // namespace detail

// Runs the boss/worker loop: the boss evaluates progress and either assigns
// a task or concludes; each worker reply is parsed into the three-part
// format, ingested into the knowledge base, and folded into every team
// member's belief state before control returns to the boss.
inline SessionResult run_session(Gateway& gateway, const SessionConfig& config,
                                 const std::string& task, KnowledgeBase& kb,
                                 CragPipeline* crag = nullptr, VectorStore* vectors = nullptr,
                                 Clock clock = fixed_clock()) {
    config.validate();

    SessionState state;
    state.config = &config;
    state.turn_budget_remaining = config.turn_budget;
    if (!config.phase_labels.empty()) state.phase_label = config.phase_labels.front();
    for (const auto& p : config.agents) state.beliefs[p.id] = initial_belief_state(p.id);
    state.current_task = task;

    SessionResult result;
    const AgentProfile& boss = config.boss();
    int next_turn = 1;

    auto emit = [&](Message m) {
        m.turn_index = next_turn++;
        m.phase = state.phase_label;
        m.timestamp = iso8601_utc(clock());
        state.transcript.messages.push_back(std::move(m));
        --state.turn_budget_remaining;
    };

    while (true) {
        if (state.turn_budget_remaining == 0) {
            state.transcript.ended_by = SessionEnd::budget_exhausted;
            break;
        }

        std::string boss_raw;
        NextAction action = boss_next_action(gateway, state, &boss_raw, &result.diagnostics);
        if (action.phase) state.phase_label = *action.phase;

        Message boss_message;
        boss_message.agent_id = boss.id;
        boss_message.raw_text = boss_raw;
        if (action.kind == NextAction::Kind::conclude) {
            boss_message.kind = MessageKind::conclusion;
            boss_message.response = action.summary;
            emit(std::move(boss_message));
            state.transcript.ended_by = SessionEnd::concluded;
            break;
        }
        boss_message.kind = MessageKind::boss_directive;
        boss_message.response = action.task_statement;
        emit(std::move(boss_message));

        if (state.turn_budget_remaining == 0) {
            state.transcript.ended_by = SessionEnd::budget_exhausted;
            break;
        }

        // Worker turn.
        const AgentProfile& worker = *config.find(action.assignee);
        state.current_task = action.task_statement;

        std::optional<std::string> kb_answer;
        if (config.kb_enabled)
            kb_answer = kb.query_knowledge_base(action.task_statement, config.kb_threshold).text;

        std::optional<std::string> rag_answer;
        if (crag && !worker.rag_collection.empty()) {
            if (vectors && !vectors->has_collection(worker.rag_collection)) {
                ++result.diagnostics.rag_collections_missing;
            } else {
                rag_answer =
                    crag->answer_with_crag(worker.rag_collection, action.task_statement, config.rag_top_k)
                        .text;
            }
        }

        CompletionRequest request;
        request.system = worker.system_prompt;
        request.user = render_agent_prompt(worker, state, action.task_statement,
                                           state.beliefs.at(worker.id), kb_answer, rag_answer);
        request.tag = tags::worker_turn;
        const std::string raw = gateway.complete(request);

        Message worker_message;
        try {
            worker_message = parse_agent_message(raw, worker.id, next_turn);
        } catch (const MissingSection&) {
            worker_message = Message{};
            worker_message.agent_id = worker.id;
            worker_message.raw_text = raw;
            worker_message.kind = MessageKind::worker_turn;
            ++result.diagnostics.malformed_worker_messages;
        } catch (const OutOfOrderSections&) {
            worker_message = Message{};
            worker_message.agent_id = worker.id;
            worker_message.raw_text = raw;
            worker_message.kind = MessageKind::worker_turn;
            ++result.diagnostics.malformed_worker_messages;
        }
        ++result.diagnostics.worker_turns;
        emit(std::move(worker_message));
        const Message& stored = state.transcript.messages.back();

        kb.add_to_kb(stored);
        for (const auto& p : config.agents)
            state.beliefs[p.id] = update_belief_state(gateway, state.beliefs.at(p.id), stored,
                                                      config.agents);

        if (config.emit_belief_sidecar)
            result.belief_sidecars[stored.turn_index] =
                detail::belief_state_json(state.beliefs.at(worker.id));

        state.latest_future_work = stored.future_work;
        state.current_task = task;
    }

    result.transcript = std::move(state.transcript);
    result.beliefs = std::move(state.beliefs);
    return result;
}

// --- Transcript serialization --------------------------------------------------

inline nlohmann::json message_json(const Message& m) {
    return {{"turn_index", m.turn_index}, {"agent_id", m.agent_id},
            {"kind", to_string(m.kind)},  {"beliefs", m.beliefs},
            {"response", m.response},     {"future_work", m.future_work},
            {"raw_text", m.raw_text},     {"phase", m.phase},
            {"timestamp", m.timestamp}};
}

inline void write_transcript_jsonl(std::ostream& out, const SessionResult& result) {
    for (const auto& m : result.transcript.messages) {
        nlohmann::json j = message_json(m);
        auto sidecar = result.belief_sidecars.find(m.turn_index);
        if (sidecar != result.belief_sidecars.end()) j["belief_state"] = sidecar->second;
        out << j.dump() << "\n";
    }
}

inline void write_transcript_jsonl(const std::filesystem::path& path, const SessionResult& result) {
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write transcript to " + path.string());
    write_transcript_jsonl(out, result);
}

inline std::vector<Message> read_transcript_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot read transcript from " + path.string());
    std::vector<Message> messages;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line);
        Message m;
        m.turn_index = j.at("turn_index").get<int>();
        m.agent_id = j.at("agent_id").get<std::string>();
        m.kind = message_kind_from_string(j.at("kind").get<std::string>());
        m.beliefs = j.value("beliefs", "");
        m.response = j.value("response", "");
        m.future_work = j.value("future_work", "");
        m.raw_text = j.value("raw_text", "");
        m.phase = j.value("phase", "");
        m.timestamp = j.value("timestamp", "");
        messages.push_back(std::move(m));
    }
    return messages;
}

} // namespace agora
