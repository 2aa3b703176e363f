// Command-line front end: sessions, knowledge-base management, logic
// solving, retrieval collections, and the mode-comparison harness.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "agora/asp.hpp"
#include "agora/crag.hpp"
#include "agora/gateway.hpp"
#include "agora/http_backends.hpp"
#include "agora/knowledge.hpp"
#include "agora/scenario.hpp"
#include "agora/session.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace agora;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string script_path;
    std::string data_dir;
    unsigned seed = 0; // reserved for randomized tie-breaking; nothing consumes it yet
    bool verbose = false;

    bool scripted() const { return !script_path.empty(); }
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io_error", "cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Scripted gateways replay fixtures and never touch the network; without
// --script the remote providers are configured from the environment.
std::unique_ptr<Gateway> build_gateway(const GlobalOptions& global) {
    if (global.scripted())
        return make_scripted_gateway(parse_script_jsonl(read_file(global.script_path)));
    return make_remote_gateway(remote_options_from_env());
}

Clock pick_clock(const GlobalOptions& global) {
    return global.scripted() ? fixed_clock() : system_clock_now();
}

fs::path kb_file(const GlobalOptions& global) { return fs::path(global.data_dir) / "kb.jsonl"; }
fs::path collections_dir(const GlobalOptions& global) {
    return fs::path(global.data_dir) / "collections";
}

void maybe_load_kb(const GlobalOptions& global, KnowledgeBase& kb) {
    if (!global.data_dir.empty() && fs::exists(kb_file(global))) kb.store().load_jsonl(kb_file(global));
}

void maybe_save_kb(const GlobalOptions& global, const KnowledgeBase& kb) {
    if (global.data_dir.empty()) return;
    fs::create_directories(global.data_dir);
    kb.store().save_jsonl(kb_file(global));
}

int cmd_run(const GlobalOptions& global, const std::string& task_flag, const std::string& mode_name,
            const std::string& out_path) {
    if (global.config_path.empty())
        throw Error("config_missing", "run requires --config with a scenario file");
    Scenario scenario = load_scenario(global.config_path);
    const std::string task = task_flag.empty() ? scenario.seed_task : task_flag;
    if (task.empty()) throw Error("task_missing", "no task given and the scenario has no seed_task");

    const EvalMode mode = eval_mode_from_string(mode_name);
    if (mode == EvalMode::tot)
        throw Error("not_implemented", "mode 'tot' is reserved but not implemented");

    auto gateway = build_gateway(global);
    Clock clock = pick_clock(global);

    SessionResult result;
    if (mode == EvalMode::mas) {
        SessionConfig config = make_session_config(scenario);
        VectorStore vectors(*gateway);
        if (!global.data_dir.empty()) vectors.load(collections_dir(global));
        for (const auto& [collection, texts] : scenario.rag_seed_documents)
            vectors.ingest(collection, texts);
        KnowledgeBase kb(*gateway);
        maybe_load_kb(global, kb);
        CragPipeline crag(*gateway, vectors, config.rag_top_k);
        result = run_session(*gateway, config, task, kb, &crag, &vectors, clock);
        maybe_save_kb(global, kb);
        if (!global.data_dir.empty()) vectors.save(collections_dir(global));
    } else {
        EvalRun run = run_solo_mode(*gateway, task, mode, clock);
        result.transcript = run.transcript;
    }

    write_transcript_jsonl(fs::path(out_path), result);
    std::cerr << "session ended ("
              << (result.transcript.ended_by == SessionEnd::concluded ? "conclusion"
                                                                      : "budget exhausted")
              << ") after " << result.transcript.messages.size() << " messages; transcript: "
              << out_path << "\n";
    return 0;
}

int cmd_kb_add(const GlobalOptions& global, const std::string& file,
               const std::vector<std::string>& triples) {
    // Direct ingestion of `subject | predicate | object` lines; extraction
    // from live conversation happens inside sessions.
    std::vector<KnowledgeTriple> batch;
    std::size_t skipped = 0;
    auto add_line = [&](const std::string& line) {
        if (trim(line).empty()) return;
        auto parts = split(line, '|');
        if (parts.size() != 3) {
            ++skipped;
            return;
        }
        batch.push_back({normalize_token(parts[0]), normalize_token(parts[1]),
                         normalize_token(parts[2]), 0, "cli"});
    };
    if (!file.empty())
        for (const auto& line : split_lines(read_file(file))) add_line(line);
    for (const auto& t : triples) add_line(t);

    TripleStore store;
    const GlobalOptions with_default = global;
    if (!global.data_dir.empty() && fs::exists(kb_file(with_default)))
        store.load_jsonl(kb_file(with_default));
    auto inserted = store.insert_batch(std::move(batch));
    if (!global.data_dir.empty()) {
        fs::create_directories(global.data_dir);
        store.save_jsonl(kb_file(with_default));
    }
    for (const auto& t : inserted) {
        nlohmann::json j{{"subject", t.subject}, {"predicate", t.predicate}, {"object", t.object}};
        std::cout << j.dump() << "\n";
    }
    std::cerr << "inserted " << inserted.size() << " triples";
    if (skipped) std::cerr << " (" << skipped << " malformed lines skipped)";
    std::cerr << "\n";
    return 0;
}

int cmd_kb_query(const GlobalOptions& global, const std::string& question, int threshold) {
    auto gateway = build_gateway(global);
    KnowledgeBase kb(*gateway);
    maybe_load_kb(global, kb);
    KbAnswer answer = kb.query_knowledge_base(question, threshold);
    nlohmann::json j{{"text", answer.text},
                     {"source", to_string(answer.source)},
                     {"rows_found", answer.rows_found}};
    if (!answer.diagnostic.empty()) j["diagnostic"] = answer.diagnostic;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_kb_dump(const GlobalOptions& global, const std::string& out_path) {
    TripleStore store;
    if (!global.data_dir.empty() && fs::exists(kb_file(global))) store.load_jsonl(kb_file(global));
    std::ostringstream buffer;
    for (const auto& t : store.dump()) {
        nlohmann::json j{{"subject", t.subject},
                         {"predicate", t.predicate},
                         {"object", t.object},
                         {"source_turn", t.source_turn},
                         {"source_agent", t.source_agent}};
        buffer << j.dump() << "\n";
    }
    if (out_path.empty()) {
        std::cout << buffer.str();
    } else {
        std::ofstream out(out_path);
        if (!out) throw Error("io_error", "cannot write " + out_path);
        out << buffer.str();
    }
    return 0;
}

int cmd_asp_solve(const GlobalOptions& global, const std::string& program_path) {
    asp::Program program = asp::ground(asp::parse_asp(read_file(program_path)));
    asp::StableModelSet models = asp::stable_models(program);
    for (const auto& model : models.models) std::cout << asp::render_model(model) << "\n";
    if (global.verbose)
        std::cerr << models.models.size() << " stable model(s) over " << models.atom_universe_size
                  << " ground atoms\n";
    return 0;
}

int cmd_rag_ingest(const GlobalOptions& global, const std::string& collection,
                   const std::string& file) {
    auto gateway = build_gateway(global);
    VectorStore vectors(*gateway);
    if (!global.data_dir.empty()) vectors.load(collections_dir(global));
    std::vector<std::string> texts;
    std::vector<std::map<std::string, std::string>> metadata;
    for (const auto& line : split_lines(read_file(file))) {
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        if (trimmed.front() == '{') {
            auto j = nlohmann::json::parse(trimmed);
            texts.push_back(j.at("text").get<std::string>());
            metadata.push_back(j.value("metadata", std::map<std::string, std::string>{}));
        } else {
            texts.push_back(trimmed);
            metadata.push_back({});
        }
    }
    auto ids = vectors.ingest(collection, texts, metadata);
    if (!global.data_dir.empty()) vectors.save(collections_dir(global));
    for (const auto& id : ids) std::cout << id << "\n";
    std::cerr << "collection '" << collection << "' now holds " << vectors.collection_size(collection)
              << " documents\n";
    return 0;
}

int cmd_rag_query(const GlobalOptions& global, const std::string& collection,
                  const std::string& query, int k) {
    auto gateway = build_gateway(global);
    VectorStore vectors(*gateway);
    if (!global.data_dir.empty()) vectors.load(collections_dir(global));
    CragPipeline crag(*gateway, vectors);
    CragAnswer answer = crag.answer_with_crag(collection, query, k);
    nlohmann::json j{{"text", answer.text},
                     {"route", to_string(answer.route)},
                     {"used_documents", answer.used_documents}};
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_eval(const GlobalOptions& global, const std::string& task_flag, const std::string& modes_csv,
             const std::string& out_dir) {
    if (global.config_path.empty())
        throw Error("config_missing", "eval requires --config with a scenario file");
    Scenario scenario = load_scenario(global.config_path);
    const std::string task = task_flag.empty() ? scenario.seed_task : task_flag;

    std::vector<EvalMode> modes;
    for (const auto& part : split(modes_csv, ','))
        if (!trim(part).empty()) modes.push_back(eval_mode_from_string(trim(part)));
    if (modes.empty()) throw Error("bad_mode", "--modes must name at least one mode");

    EvalOptions options;
    options.gateway_factory = [&global] { return build_gateway(global); };
    options.clock = pick_clock(global);
    EvalOutput output = run_eval(scenario, task, modes, options);

    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < output.runs.size(); ++i) {
        SessionResult for_writing;
        auto session = output.session_results.find(i);
        if (session != output.session_results.end()) {
            for_writing = session->second;
        } else {
            for_writing.transcript = output.runs[i].transcript;
        }
        write_transcript_jsonl(fs::path(out_dir) /
                                   ("transcript-" + to_string(output.runs[i].mode) + ".jsonl"),
                               for_writing);
    }
    nlohmann::json report = eval_report_json(scenario.name, task, output);
    {
        std::ofstream out(fs::path(out_dir) / "report.json");
        out << report.dump(2) << "\n";
    }
    const std::string table = eval_report_table(output);
    {
        std::ofstream out(fs::path(out_dir) / "report.txt");
        out << table;
    }
    std::cout << table;
    std::cerr << "report written to " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical multi-agent sessions with a logic-backed knowledge base and "
                 "corrective retrieval"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_path, "scenario/session config JSON")->envname("AGORA_CONFIG");
    app.add_option("--script", global.script_path, "scripted-backend fixture (JSONL); forces offline mode");
    app.add_option("--data-dir", global.data_dir, "directory for persisted KB and collections");
    app.add_option("--seed", global.seed, "seed for randomized tie-breaking (reserved)");
    app.add_flag("--verbose", global.verbose, "extra diagnostics on stderr");

    // run
    auto* run = app.add_subcommand("run", "run a session and write its transcript");
    std::string run_task, run_mode = "mas", run_out = "transcript.jsonl";
    run->add_option("--task", run_task, "task statement (default: scenario seed task)");
    run->add_option("--mode", run_mode, "single | cot | mas");
    run->add_option("--out", run_out, "transcript output path (JSONL)");

    // kb-add
    auto* kb_add = app.add_subcommand("kb-add", "insert `subject | predicate | object` lines");
    std::string kb_add_file;
    std::vector<std::string> kb_add_triples;
    kb_add->add_option("--file", kb_add_file, "file of triple lines");
    kb_add->add_option("--triple", kb_add_triples, "inline triple line (repeatable)");

    // kb-query
    auto* kb_query = app.add_subcommand("kb-query", "answer a question from the knowledge base");
    std::string kb_question;
    int kb_threshold = 2;
    kb_query->add_option("--question", kb_question, "natural-language question")->required();
    kb_query->add_option("--threshold", kb_threshold, "row threshold for the graph route");

    // kb-dump
    auto* kb_dump = app.add_subcommand("kb-dump", "dump the stored triples as JSONL");
    std::string kb_dump_out;
    kb_dump->add_option("--out", kb_dump_out, "output file (default: stdout)");

    // asp-solve
    auto* asp_solve = app.add_subcommand("asp-solve", "solve a .lp program, one model per line");
    std::string asp_file;
    asp_solve->add_option("file", asp_file, "logic program file")->required();

    // rag-ingest
    auto* rag_ingest = app.add_subcommand("rag-ingest", "embed and store documents in a collection");
    std::string rag_collection, rag_file;
    rag_ingest->add_option("--collection", rag_collection, "collection name")->required();
    rag_ingest->add_option("--file", rag_file, "one document per line, or JSONL with text/metadata")
        ->required();

    // rag-query
    auto* rag_query = app.add_subcommand("rag-query", "corrective retrieval over a collection");
    std::string rag_q_collection, rag_q_query;
    int rag_k = 4;
    rag_query->add_option("--collection", rag_q_collection, "collection name")->required();
    rag_query->add_option("--query", rag_q_query, "query text")->required();
    rag_query->add_option("-k,--top-k", rag_k, "documents to retrieve");

    // eval
    auto* eval = app.add_subcommand("eval", "compare run modes on one task");
    std::string eval_task, eval_modes = "single,cot,mas", eval_out_dir = "eval_out";
    eval->add_option("--task", eval_task, "task statement (default: scenario seed task)");
    eval->add_option("--modes", eval_modes, "comma-separated: single,cot,mas");
    eval->add_option("--out-dir", eval_out_dir, "report/transcript output directory");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(global, run_task, run_mode, run_out);
        if (kb_add->parsed()) return cmd_kb_add(global, kb_add_file, kb_add_triples);
        if (kb_query->parsed()) return cmd_kb_query(global, kb_question, kb_threshold);
        if (kb_dump->parsed()) return cmd_kb_dump(global, kb_dump_out);
        if (asp_solve->parsed()) return cmd_asp_solve(global, asp_file);
        if (rag_ingest->parsed()) return cmd_rag_ingest(global, rag_collection, rag_file);
        if (rag_query->parsed()) return cmd_rag_query(global, rag_q_collection, rag_q_query, rag_k);
        if (eval->parsed()) return cmd_eval(global, eval_task, eval_modes, eval_out_dir);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
