#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "agora/knowledge.hpp"
#include "agora/solver_loop.hpp"
#include "support/test_env.hpp"

using namespace agora;

namespace {
Message worker_message(const std::string& agent, int turn, const std::string& raw) {
    Message m;
    m.agent_id = agent;
    m.turn_index = turn;
    m.kind = MessageKind::worker_turn;
    m.raw_text = raw;
    return m;
}
} // namespace

TEST(NormalizeToken, LowercasesAndJoinsWhitespace) {
    EXPECT_EQ(normalize_token("Energy Monitoring"), "energy_monitoring");
    EXPECT_EQ(normalize_token("  MVP  "), "mvp");
    EXPECT_EQ(normalize_token("a\tb  c"), "a_b_c");
    EXPECT_EQ(normalize_token("   "), "");
}

TEST(TripleStore, InsertBatchNormalizesAndDedupes) {
    TripleStore store;
    auto first = store.insert_batch({{"MVP", "Targets", "Home Owners", 1, "jamie"}});
    ASSERT_EQ(first.size(), 1u);
    EXPECT_EQ(first[0].subject, "mvp");
    EXPECT_EQ(first[0].object, "home_owners");
    auto second = store.insert_batch({{"mvp", "targets", "home owners", 2, "sam"}});
    EXPECT_TRUE(second.empty());
    EXPECT_EQ(store.size(), 1u);
}

TEST(TripleStore, SelectRequiresABoundSlot) {
    TripleStore store;
    EXPECT_THROW(store.select(TriplePattern{}), AllSlotsUnbound);
}

TEST(TripleStore, SelectMatchesBoundSlots) {
    TripleStore store;
    store.insert_batch({{"mvp", "targets", "homeowners", 1, "jamie"},
                        {"mvp", "includes", "monitoring", 2, "jamie"},
                        {"sam", "reports_to", "alex", 3, "sam"}});
    auto by_subject = store.select(TriplePattern{.subject = "mvp"});
    ASSERT_EQ(by_subject.size(), 2u);
    EXPECT_EQ(by_subject[0].predicate, "targets");
    EXPECT_EQ(by_subject[1].predicate, "includes");
    EXPECT_TRUE(store.select(TriplePattern{.predicate = "assigned"}).empty());
    auto exact = store.select(
        TriplePattern{.subject = "sam", .predicate = "reports_to", .object = "alex"});
    EXPECT_EQ(exact.size(), 1u);
}

TEST(TripleStoreProperty, SelectEqualsBruteForceFilter) {
    std::mt19937 rng(31);
    const std::vector<std::string> tokens = {"a", "b", "c", "d"};
    std::uniform_int_distribution<std::size_t> tok(0, tokens.size() - 1);
    std::uniform_int_distribution<int> turn(0, 9);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int round = 0; round < 50; ++round) {
        TripleStore store;
        std::vector<KnowledgeTriple> raw;
        for (int i = 0; i < 20; ++i)
            raw.push_back({tokens[tok(rng)], tokens[tok(rng)], tokens[tok(rng)], turn(rng), "t"});
        store.insert_batch(raw);

        TriplePattern pattern;
        if (coin(rng)) pattern.subject = tokens[tok(rng)];
        if (coin(rng)) pattern.predicate = tokens[tok(rng)];
        if (coin(rng)) pattern.object = tokens[tok(rng)];
        if (!pattern.any_bound()) pattern.subject = tokens[tok(rng)];

        auto expected = store.dump();
        std::erase_if(expected, [&](const KnowledgeTriple& t) { return !pattern.matches(t); });
        std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
            return std::tie(a.source_turn, a.subject, a.predicate, a.object) <
                   std::tie(b.source_turn, b.subject, b.predicate, b.object);
        });
        EXPECT_EQ(store.select(pattern), expected);
    }
}

TEST(TripleStore, JsonlRoundTrip) {
    TripleStore store;
    store.insert_batch({{"mvp", "targets", "homeowners", 1, "jamie"},
                        {"homeowners", "want", "savings", 4, "sam"}});
    auto path = std::filesystem::temp_directory_path() / "kb_roundtrip.jsonl";
    store.save_jsonl(path);
    TripleStore loaded;
    loaded.load_jsonl(path);
    EXPECT_EQ(loaded.dump(), store.dump());
}

TEST(AddToKb, ParsesExtractionLines) {
    auto gateway = test_env::scripted_gateway(
        {{tags::extract_triples, "mvp | targets | homeowners"}});
    KnowledgeBase kb(*gateway);
    auto inserted = kb.add_to_kb(worker_message("jamie", 2, "The MVP targets homeowners."));
    ASSERT_EQ(inserted.size(), 1u);
    EXPECT_EQ(inserted[0].subject, "mvp");
    EXPECT_EQ(inserted[0].source_turn, 2);
    EXPECT_EQ(inserted[0].source_agent, "jamie");
    EXPECT_EQ(kb.store().size(), 1u);
}

TEST(AddToKb, EmptyExtractionLeavesStoreUnchanged) {
    auto gateway = test_env::scripted_gateway({{tags::extract_triples, ""}});
    KnowledgeBase kb(*gateway);
    EXPECT_TRUE(kb.add_to_kb(worker_message("jamie", 1, "chatter")).empty());
    EXPECT_EQ(kb.store().size(), 0u);
}

TEST(AddToKb, DuplicateAcrossTurnsIsDedupedAndMonotone) {
    auto gateway = test_env::scripted_gateway(
        {{tags::extract_triples, "mvp | targets | homeowners"},
         {tags::extract_triples, "mvp | targets | homeowners"}});
    KnowledgeBase kb(*gateway);
    auto first = kb.add_to_kb(worker_message("jamie", 1, "x"));
    ASSERT_EQ(first.size(), 1u);
    auto before = kb.store().dump();
    auto second = kb.add_to_kb(worker_message("sam", 2, "y"));
    EXPECT_TRUE(second.empty());
    EXPECT_EQ(kb.store().dump(), before);
}

TEST(AddToKb, MalformedLinesAreSkippedAndCounted) {
    auto gateway = test_env::scripted_gateway(
        {{tags::extract_triples, "just some prose\nmvp | targets | homeowners\na | b"}});
    KnowledgeBase kb(*gateway);
    auto inserted = kb.add_to_kb(worker_message("jamie", 1, "x"));
    EXPECT_EQ(inserted.size(), 1u);
    EXPECT_EQ(kb.diagnostics().extraction_lines_skipped, 2u);
}

TEST(AddToKb, RequiresWorkerTurn) {
    auto gateway = test_env::scripted_gateway({});
    KnowledgeBase kb(*gateway);
    Message boss = worker_message("alex", 1, "x");
    boss.kind = MessageKind::boss_directive;
    EXPECT_THROW(kb.add_to_kb(boss), std::invalid_argument);
}

TEST(PatternReply, ParsesKeyValuePairs) {
    TriplePattern p = parse_pattern_reply("subject=MVP predicate=? object=Home Owners");
    ASSERT_TRUE(p.subject);
    EXPECT_EQ(*p.subject, "mvp");
    EXPECT_FALSE(p.predicate);
    ASSERT_TRUE(p.object);
    EXPECT_EQ(*p.object, "home");
    TriplePattern unbound = parse_pattern_reply("no structure here");
    EXPECT_FALSE(unbound.any_bound());
}

TEST(QueryKb, GraphRouteAtOrAboveThreshold) {
    auto gateway = test_env::scripted_gateway(
        {{tags::nl_to_pattern, "subject=mvp"},
         {tags::rows_to_nl, "The MVP targets homeowners and includes monitoring."}});
    KnowledgeBase kb(*gateway);
    kb.store().insert_batch({{"mvp", "targets", "homeowners", 1, "jamie"},
                             {"mvp", "includes", "monitoring", 2, "jamie"}});
    KbAnswer answer = kb.query_knowledge_base("What does the mvp do?", 1);
    EXPECT_EQ(answer.source, KbAnswer::Source::graph);
    EXPECT_EQ(answer.rows_found, 2u);
    EXPECT_NE(answer.text.find("homeowners"), std::string::npos);
    EXPECT_EQ(kb.diagnostics().solver_invocations, 0u);
}

TEST(QueryKb, SolverRouteBelowThreshold) {
    auto gateway = test_env::scripted_gateway(
        {{tags::nl_to_pattern, "subject=implementfeaturex"},
         {tags::nl_to_asp,
          "task(implementfeaturex). assigned(implementfeaturex,alice). "
          "completed(X) :- task(X), assigned(X,alice)."},
         {tags::models_to_nl, "Yes, ImplementFeatureX is completed."}});
    KnowledgeBase kb(*gateway);
    KbAnswer answer = kb.query_knowledge_base("Is the task ImplementFeatureX completed?", 3);
    EXPECT_EQ(answer.source, KbAnswer::Source::solver);
    EXPECT_EQ(answer.rows_found, 0u);
    EXPECT_NE(answer.text.find("completed"), std::string::npos);
    EXPECT_EQ(kb.diagnostics().solver_invocations, 1u);
}

TEST(QueryKb, EmptyModelSetIsUnknown) {
    auto gateway = test_env::scripted_gateway(
        {{tags::nl_to_pattern, "subject=anything"}, {tags::nl_to_asp, "p :- not p."}});
    KnowledgeBase kb(*gateway);
    KbAnswer answer = kb.query_knowledge_base("Is anything known?", 2);
    EXPECT_EQ(answer.source, KbAnswer::Source::unknown);
    EXPECT_EQ(answer.text, kInsufficientKnowledgeText);
}

TEST(QueryKb, TranslationFailureIsUnknownWithDiagnostic) {
    auto gateway = test_env::scripted_gateway({{tags::nl_to_pattern, "subject=x"},
                                               {tags::nl_to_asp, "(("},
                                               {tags::nl_to_asp, "(("},
                                               {tags::nl_to_asp, "(("}});
    KnowledgeBase kb(*gateway);
    KbAnswer answer = kb.query_knowledge_base("Broken?", 2);
    EXPECT_EQ(answer.source, KbAnswer::Source::unknown);
    EXPECT_NE(answer.diagnostic.find("3 attempts"), std::string::npos);
    EXPECT_EQ(kb.diagnostics().translation_failures, 1u);
}

// --- Translation loop ---------------------------------------------------------

TEST(NlToAsp, RendersContextTriplesAsFacts) {
    auto gateway = test_env::scripted_gateway({{tags::nl_to_asp, "task(a)."}});
    std::vector<KnowledgeTriple> context = {{"a", "depends_on", "b", 1, "t"}};
    nl_to_asp(*gateway, "Does a depend on b?", context);
    auto calls = test_env::scripted_backend(*gateway).calls();
    ASSERT_EQ(calls.size(), 1u);
    EXPECT_NE(calls[0].user.find("depends_on(a,b)."), std::string::npos);
    EXPECT_NE(calls[0].user.find("Does a depend on b?"), std::string::npos);
}

TEST(SolveWithRetry, FirstAttemptSucceeds) {
    auto gateway = test_env::scripted_gateway({{tags::nl_to_asp, "task(mvp)."}});
    SolveOutcome outcome = solve_with_retry(*gateway, "Any tasks?", {});
    EXPECT_EQ(outcome.attempts, 1);
    ASSERT_EQ(outcome.models.models.size(), 1u);
    EXPECT_EQ(asp::render_model(outcome.models.models[0]), "{task(mvp)}");
}

TEST(SolveWithRetry, ErrorIsFedBackAndThirdAttemptWins) {
    auto gateway = test_env::scripted_gateway({{tags::nl_to_asp, "task("},
                                               {tags::nl_to_asp, "p(X) :- not q(X)."},
                                               {tags::nl_to_asp, "task(mvp)."}});
    SolveOutcome outcome = solve_with_retry(*gateway, "Any tasks?", {});
    EXPECT_EQ(outcome.attempts, 3);
    auto calls = test_env::scripted_backend(*gateway).calls();
    ASSERT_EQ(calls.size(), 3u);
    // Second prompt carries the first syntax error verbatim; third carries
    // the safety violation.
    EXPECT_NE(calls[1].user.find("syntax error at"), std::string::npos);
    EXPECT_NE(calls[2].user.find("safety violation"), std::string::npos);
}

TEST(SolveWithRetry, ThreeFailuresRaiseTranslationFailed) {
    auto gateway = test_env::scripted_gateway(
        {{tags::nl_to_asp, "x("}, {tags::nl_to_asp, "y("}, {tags::nl_to_asp, "z("}});
    try {
        solve_with_retry(*gateway, "Any tasks?", {});
        FAIL() << "expected TranslationFailed";
    } catch (const TranslationFailed& e) {
        EXPECT_EQ(e.attempts, 3);
        EXPECT_NE(e.last_error.find("syntax error"), std::string::npos);
    }
}

TEST(AnswerFromModels, UsesGatewayForNonEmptyModels) {
    auto gateway = test_env::scripted_gateway(
        {{tags::models_to_nl, "Yes, ImplementFeatureX is completed."}});
    asp::StableModelSet models =
        asp::stable_models(asp::parse_asp("completed(implementfeaturex)."));
    std::string answer =
        answer_from_models(*gateway, models, "Is the task ImplementFeatureX completed?");
    EXPECT_EQ(answer, "Yes, ImplementFeatureX is completed.");
    auto calls = test_env::scripted_backend(*gateway).calls();
    ASSERT_EQ(calls.size(), 1u);
    EXPECT_NE(calls[0].user.find("{completed(implementfeaturex)}"), std::string::npos);
}

TEST(AnswerFromModels, EmptyModelSetShortCircuits) {
    auto gateway = test_env::scripted_gateway({});
    std::string answer = answer_from_models(*gateway, asp::StableModelSet{}, "Anything?");
    EXPECT_EQ(answer, "no consistent answer");
    EXPECT_TRUE(test_env::scripted_backend(*gateway).calls().empty());
}

TEST(AnswerFromModels, TwoModelsRenderedOnSeparateLines) {
    auto gateway = test_env::scripted_gateway({{tags::models_to_nl, "Either holds."}});
    asp::StableModelSet models = asp::stable_models(asp::parse_asp("p :- not q. q :- not p."));
    answer_from_models(*gateway, models, "Which?");
    auto calls = test_env::scripted_backend(*gateway).calls();
    ASSERT_EQ(calls.size(), 1u);
    EXPECT_NE(calls[0].user.find("{p}\n{q}"), std::string::npos);
}
