#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agora/errors.hpp"
#include "agora/gateway.hpp"
#include "agora/session.hpp"

#include "json.hpp"

namespace agora {

// A packaged team problem: who is on the team, the phases the boss may move
// through, the task that seeds the session, and per-collection documents to
// preload into the vector store.
struct Scenario {
    std::string name;
    std::vector<AgentProfile> team;
    std::vector<std::string> phase_labels;
    std::string seed_task;
    std::map<std::string, std::vector<std::string>> rag_seed_documents;

    // Session knobs carried in the same file.
    int turn_budget = 24;
    bool kb_enabled = true;
    int kb_threshold = 2;
    int rag_top_k = 4;
};

inline Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    try {
        s.name = j.at("name").get<std::string>();
        s.seed_task = j.value("seed_task", "");
        for (const auto& label : j.value("phase_labels", nlohmann::json::array()))
            s.phase_labels.push_back(label.get<std::string>());
        for (const auto& a : j.at("agents")) {
            AgentProfile p;
            p.id = a.at("id").get<std::string>();
            p.display_name = a.value("display_name", p.id);
            p.role_title = a.value("role_title", "");
            p.system_prompt = a.value("system_prompt", "");
            p.is_boss = a.value("is_boss", false);
            p.rag_collection = a.value("rag_collection", "");
            for (const auto& r : a.value("responsibilities", nlohmann::json::array()))
                p.responsibilities.push_back(r.get<std::string>());
            s.team.push_back(std::move(p));
        }
        if (j.contains("rag_seed_documents"))
            for (const auto& [collection, texts] : j.at("rag_seed_documents").items())
                for (const auto& t : texts) s.rag_seed_documents[collection].push_back(t.get<std::string>());
        s.turn_budget = j.value("turn_budget", 24);
        if (j.contains("kb")) {
            s.kb_enabled = j.at("kb").value("enabled", true);
            s.kb_threshold = j.at("kb").value("threshold", 2);
        }
        if (j.contains("rag")) s.rag_top_k = j.at("rag").value("top_k", 4);
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioInvalid(e.what());
    }

    if (s.phase_labels.empty()) throw ScenarioInvalid("phase_labels must be non-empty");
    SessionConfig probe;
    probe.agents = s.team;
    probe.turn_budget = s.turn_budget;
    probe.kb_threshold = s.kb_threshold;
    try {
        probe.validate();
    } catch (const ConfigInvalid& e) {
        throw ScenarioInvalid(e.what());
    }
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioInvalid("cannot read scenario file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioInvalid(std::string("scenario file is not valid JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

inline SessionConfig make_session_config(const Scenario& scenario) {
    SessionConfig config;
    config.agents = scenario.team;
    config.turn_budget = scenario.turn_budget;
    config.kb_enabled = scenario.kb_enabled;
    config.kb_threshold = scenario.kb_threshold;
    config.rag_top_k = scenario.rag_top_k;
    config.phase_labels = scenario.phase_labels;
    return config;
}

// --- Evaluation harness --------------------------------------------------------

// Run modes compared by the harness. `tot` is reserved for a tree-of-thoughts
// baseline and deliberately unimplemented.
enum class EvalMode { single, cot, mas, tot };

inline std::string to_string(EvalMode m) {
    switch (m) {
    case EvalMode::single: return "single";
    case EvalMode::cot: return "cot";
    case EvalMode::mas: return "mas";
    case EvalMode::tot: return "tot";
    }
    return "single";
}

inline EvalMode eval_mode_from_string(const std::string& s) {
    if (s == "single") return EvalMode::single;
    if (s == "cot") return EvalMode::cot;
    if (s == "mas") return EvalMode::mas;
    if (s == "tot") return EvalMode::tot;
    throw Error("bad_mode", "unknown eval mode '" + s + "' (expected single, cot, mas, or tot)");
}

inline constexpr const char* kCotInstruction =
    "Think through the problem step by step, then give your final answer.";

inline constexpr const char* kSoloSystemPrompt =
    "You are an experienced product analyst working alone on the given task.";

struct EvalRun {
    EvalMode mode = EvalMode::single;
    Transcript transcript;
    std::map<std::string, double> structural_metrics;
};

struct EvalOptions {
    // Fresh gateway per mode so scripted cursors and counters are isolated.
    std::function<std::unique_ptr<Gateway>()> gateway_factory;
    Clock clock = fixed_clock();
};

namespace detail {
inline std::map<std::string, double> structural_metrics(const Transcript& transcript,
                                                        double kb_triples, double solver_invocations,
                                                        double web_fallbacks, double well_formed_ratio) {
    std::set<std::string> agents;
    for (const auto& m : transcript.messages) agents.insert(m.agent_id);
    return {{"message_count", static_cast<double>(transcript.messages.size())},
            {"distinct_agents", static_cast<double>(agents.size())},
            {"kb_triples_added", kb_triples},
            {"solver_invocations", solver_invocations},
            {"web_fallbacks", web_fallbacks},
            {"sections_well_formed_ratio", well_formed_ratio}};
}
} // namespace detail

// Builds the prompt used by the non-MAS baselines.
inline std::string solo_prompt(const std::string& task, EvalMode mode) {
    std::string user = "Task: " + task;
    if (mode == EvalMode::cot) user += "\n\n" + std::string(kCotInstruction);
    return user;
}

inline EvalRun run_solo_mode(Gateway& gateway, const std::string& task, EvalMode mode, Clock clock) {
    CompletionRequest request;
    request.system = kSoloSystemPrompt;
    request.user = solo_prompt(task, mode);
    request.tag = mode == EvalMode::cot ? tags::cot_mode : tags::single_mode;
    const std::string reply = gateway.complete(request);

    EvalRun run;
    run.mode = mode;
    Message m;
    m.turn_index = 1;
    m.agent_id = to_string(mode);
    m.kind = MessageKind::conclusion;
    m.response = reply;
    m.raw_text = reply;
    m.timestamp = iso8601_utc(clock());
    run.transcript.messages.push_back(std::move(m));
    run.transcript.ended_by = SessionEnd::concluded;
    run.structural_metrics = detail::structural_metrics(run.transcript, 0, 0,
                                                        static_cast<double>(gateway.counters().search_calls),
                                                        1.0);
    return run;
}

struct EvalOutput {
    std::vector<EvalRun> runs;
    // Full session results for mas runs, keyed by position in `runs`.
    std::map<std::size_t, SessionResult> session_results;
};

// Runs the task once per mode with isolated knowledge and vector stores,
// and computes the structural metrics the comparison report is built from.
inline EvalOutput run_eval(const Scenario& scenario, const std::string& task,
                           const std::vector<EvalMode>& modes, const EvalOptions& options) {
    if (modes.empty()) throw std::invalid_argument("modes must be non-empty");
    if (!options.gateway_factory) throw std::invalid_argument("gateway_factory is required");

    EvalOutput output;
    for (EvalMode mode : modes) {
        if (mode == EvalMode::tot)
            throw Error("not_implemented", "eval mode 'tot' is reserved but not implemented");
        auto gateway = options.gateway_factory();
        if (mode == EvalMode::single || mode == EvalMode::cot) {
            output.runs.push_back(run_solo_mode(*gateway, task, mode, options.clock));
            continue;
        }

        SessionConfig config = make_session_config(scenario);
        VectorStore vectors(*gateway);
        for (const auto& [collection, texts] : scenario.rag_seed_documents)
            vectors.ingest(collection, texts);
        KnowledgeBase kb(*gateway);
        CragPipeline crag(*gateway, vectors, config.rag_top_k);

        SessionResult result = run_session(*gateway, config, task, kb, &crag, &vectors, options.clock);

        EvalRun run;
        run.mode = mode;
        run.transcript = result.transcript;
        run.structural_metrics = detail::structural_metrics(
            run.transcript, static_cast<double>(kb.store().size()),
            static_cast<double>(kb.diagnostics().solver_invocations),
            static_cast<double>(gateway->counters().search_calls),
            result.diagnostics.sections_well_formed_ratio());
        output.runs.push_back(std::move(run));
        output.session_results[output.runs.size() - 1] = std::move(result);
    }
    return output;
}

// --- Reports --------------------------------------------------------------------

inline nlohmann::json metric_value_json(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) return static_cast<std::int64_t>(v);
    return v;
}

inline nlohmann::json eval_report_json(const std::string& scenario_name, const std::string& task,
                                       const EvalOutput& output) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : output.runs) {
        nlohmann::json metrics = nlohmann::json::object();
        for (const auto& [key, value] : run.structural_metrics) metrics[key] = metric_value_json(value);
        runs.push_back({{"mode", to_string(run.mode)},
                        {"metrics", metrics},
                        {"ended_by", run.transcript.ended_by == SessionEnd::concluded
                                         ? "conclusion"
                                         : "budget_exhausted"}});
    }
    return {{"scenario", scenario_name}, {"task", task}, {"runs", runs}};
}

inline std::string eval_report_table(const EvalOutput& output) {
    std::ostringstream out;
    out << "mode    messages  agents  kb_triples  solver  web  well_formed\n";
    out << "------  --------  ------  ----------  ------  ---  -----------\n";
    for (const auto& run : output.runs) {
        const auto& m = run.structural_metrics;
        char line[160];
        std::snprintf(line, sizeof(line), "%-6s  %8.0f  %6.0f  %10.0f  %6.0f  %3.0f  %11.3f\n",
                      to_string(run.mode).c_str(), m.at("message_count"), m.at("distinct_agents"),
                      m.at("kb_triples_added"), m.at("solver_invocations"), m.at("web_fallbacks"),
                      m.at("sections_well_formed_ratio"));
        out << line;
    }
    return out.str();
}

} // namespace agora
