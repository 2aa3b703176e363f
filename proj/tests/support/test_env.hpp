#pragma once

// Shared plumbing for the test suites: repo paths wired in by CMake, scripted
// gateway construction, random program generators, and a CLI runner.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "agora/asp.hpp"
#include "agora/gateway.hpp"

namespace test_env {

inline std::filesystem::path repo_dir() {
#ifdef AGORA_REPO_DIR
    return std::filesystem::path(AGORA_REPO_DIR);
#else
    return std::filesystem::current_path();
#endif
}

inline std::filesystem::path fixtures_dir() { return repo_dir() / "fixtures"; }
inline std::filesystem::path scenarios_dir() { return repo_dir() / "scenarios"; }

inline std::unique_ptr<agora::Gateway> scripted_gateway(
    std::vector<agora::ScriptEntry> entries,
    std::map<std::string, std::vector<agora::SearchResult>> searches = {}) {
    auto search = std::make_unique<agora::FixtureSearchClient>();
    for (auto& [query, results] : searches) search->add(query, results);
    return std::make_unique<agora::Gateway>(std::make_unique<agora::ScriptedBackend>(std::move(entries)),
                                            std::make_unique<agora::TrigramEmbedder>(),
                                            std::move(search));
}

inline const agora::ScriptedBackend& scripted_backend(const agora::Gateway& gateway) {
    return *dynamic_cast<const agora::ScriptedBackend*>(
        const_cast<agora::Gateway&>(gateway).chat_backend());
}

// Pool of ground atoms with a fixed arity per predicate, so random programs
// always satisfy the per-program arity invariant.
inline std::vector<agora::asp::Atom> ground_atom_pool() {
    using namespace agora::asp;
    return {
        Atom{"p", {}},
        Atom{"q", {}},
        Atom{"r", {constant("a")}},
        Atom{"s", {constant("a"), constant("b")}},
        Atom{"t", {}},
        Atom{"u", {constant("b")}},
    };
}

inline agora::asp::Program random_ground_program(std::mt19937& rng, int max_rules = 8,
                                                 int max_atoms = 6) {
    const auto pool = ground_atom_pool();
    std::uniform_int_distribution<int> atom_dist(0, max_atoms - 1);
    std::uniform_int_distribution<int> rule_count(1, max_rules);
    std::uniform_int_distribution<int> body_count(0, 2);

    agora::asp::Program program;
    const int n = rule_count(rng);
    for (int i = 0; i < n; ++i) {
        agora::asp::Rule rule;
        rule.head = pool[static_cast<std::size_t>(atom_dist(rng))];
        const int npos = body_count(rng);
        for (int k = 0; k < npos; ++k)
            rule.positive_body.push_back(pool[static_cast<std::size_t>(atom_dist(rng))]);
        const int nneg = body_count(rng);
        for (int k = 0; k < nneg; ++k)
            rule.negative_body.push_back(pool[static_cast<std::size_t>(atom_dist(rng))]);
        program.rules.push_back(std::move(rule));
    }
    return program;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string cli_path() {
#ifdef AGORA_CLI_PATH
    return AGORA_CLI_PATH;
#else
    return "agora";
#endif
}

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

inline CliResult run_cli(const std::vector<std::string>& args,
                         const std::map<std::string, std::string>& env = {}) {
    const auto out_path = std::filesystem::temp_directory_path() / "agora_cli_out.txt";
    const auto err_path = std::filesystem::temp_directory_path() / "agora_cli_err.txt";
    std::string command;
    for (const auto& [key, value] : env) command += key + "=" + shell_quote(value) + " ";
    command += shell_quote(cli_path());
    for (const auto& a : args) command += " " + shell_quote(a);
    command += " > " + shell_quote(out_path.string()) + " 2> " + shell_quote(err_path.string());

    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline std::filesystem::path write_temp_file(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

} // namespace test_env
