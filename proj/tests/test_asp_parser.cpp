#include <gtest/gtest.h>

#include <random>

#include "agora/asp.hpp"

using namespace agora;
using namespace agora::asp;

TEST(AspParser, SingleFact) {
    Program p = parse_asp("completed(implementfeaturex).");
    ASSERT_EQ(p.rules.size(), 1u);
    EXPECT_TRUE(p.rules[0].is_fact());
    EXPECT_EQ(p.rules[0].head.to_string(), "completed(implementfeaturex)");
}

TEST(AspParser, EmptySourceIsEmptyProgram) {
    EXPECT_TRUE(parse_asp("").rules.empty());
    EXPECT_TRUE(parse_asp("  \n\t\n").rules.empty());
    EXPECT_TRUE(parse_asp("% only a comment\n").rules.empty());
}

TEST(AspParser, RuleWithMixedBody) {
    Program p = parse_asp("win(X) :- move(X), not lost(X).");
    ASSERT_EQ(p.rules.size(), 1u);
    const Rule& r = p.rules[0];
    EXPECT_EQ(r.head.to_string(), "win(X)");
    ASSERT_EQ(r.positive_body.size(), 1u);
    EXPECT_EQ(r.positive_body[0].to_string(), "move(X)");
    ASSERT_EQ(r.negative_body.size(), 1u);
    EXPECT_EQ(r.negative_body[0].to_string(), "lost(X)");
    EXPECT_TRUE(r.head.terms[0].is_variable());
}

TEST(AspParser, WhitespaceAndCommentsIgnored) {
    Program a = parse_asp("p :- q , not r .\nq.\n");
    Program b = parse_asp("% header\n  p:-q,not r. % trailing\n\n\tq.");
    EXPECT_EQ(a, b);
}

TEST(AspParser, UnclosedParenthesisReportsPosition) {
    try {
        parse_asp("completed(implementfeaturex");
        FAIL() << "expected AspSyntaxError";
    } catch (const AspSyntaxError& e) {
        EXPECT_EQ(e.line, 1);
        EXPECT_EQ(e.column, 28);
        EXPECT_NE(e.detail.find("')'"), std::string::npos) << e.detail;
    }
}

TEST(AspParser, ErrorPositionOnLaterLine) {
    try {
        parse_asp("p.\nq :- r,, s.\n");
        FAIL() << "expected AspSyntaxError";
    } catch (const AspSyntaxError& e) {
        EXPECT_EQ(e.line, 2);
        EXPECT_EQ(e.column, 8);
    }
}

TEST(AspParser, MissingDotAfterHead) {
    EXPECT_THROW(parse_asp("p q."), AspSyntaxError);
    EXPECT_THROW(parse_asp("p"), AspSyntaxError);
}

TEST(AspParser, LoneColonRejected) {
    EXPECT_THROW(parse_asp("p : q."), AspSyntaxError);
}

TEST(AspParser, NumbersAndSymbolsRejected) {
    EXPECT_THROW(parse_asp("p(1)."), AspSyntaxError);
    EXPECT_THROW(parse_asp("p(a-b)."), AspSyntaxError);
}

TEST(AspParser, NotIsReservedInHead) {
    EXPECT_THROW(parse_asp("not p."), AspSyntaxError);
}

TEST(AspParser, DoubleNegationRejected) {
    EXPECT_THROW(parse_asp("p :- not not q."), AspSyntaxError);
}

TEST(AspParser, ArityMustBeConsistent) {
    EXPECT_THROW(parse_asp("p(a). p(a,b)."), AspSyntaxError);
    EXPECT_NO_THROW(parse_asp("p(a). p(b)."));
}

TEST(AspParser, SafetyViolationInNegativeBody) {
    try {
        parse_asp("p(X) :- not q(X).");
        FAIL() << "expected AspSafetyError";
    } catch (const AspSafetyError& e) {
        EXPECT_EQ(e.rule_index, 0u);
        EXPECT_EQ(e.variable, "X");
    }
}

TEST(AspParser, SafetyViolationInHead) {
    try {
        parse_asp("q(a).\nreach(X,Y) :- edge(X).");
        FAIL() << "expected AspSafetyError";
    } catch (const AspSafetyError& e) {
        EXPECT_EQ(e.rule_index, 1u);
        EXPECT_EQ(e.variable, "Y");
    }
}

TEST(AspParser, FactWithVariableIsUnsafe) {
    EXPECT_THROW(parse_asp("p(X)."), AspSafetyError);
}

TEST(AspParser, CanonicalPrintParsesBack) {
    const std::string source = "task(implementfeaturex).\n"
                               "assigned(implementfeaturex,alice).\n"
                               "completed(X) :- task(X), assigned(X,alice).\n";
    Program p = parse_asp(source);
    EXPECT_EQ(p.to_string(), source);
    EXPECT_EQ(parse_asp(p.to_string()), p);
}

namespace {

// Random programs that stay inside the grammar and the safety condition:
// positive body first, head and negative-body variables drawn from it.
Program random_valid_program(std::mt19937& rng) {
    const std::vector<std::pair<std::string, int>> predicates = {
        {"pa", 0}, {"pb", 1}, {"pc", 2}, {"pd", 1}, {"pe", 2}};
    const std::vector<std::string> constants = {"c", "d", "e"};
    const std::vector<std::string> variables = {"X", "Y", "Z"};
    std::uniform_int_distribution<int> rule_count(1, 6);
    std::uniform_int_distribution<int> body_size(0, 2);
    std::uniform_int_distribution<std::size_t> pred_pick(0, predicates.size() - 1);
    std::uniform_int_distribution<std::size_t> const_pick(0, constants.size() - 1);
    std::uniform_int_distribution<std::size_t> var_pick(0, variables.size() - 1);
    std::uniform_int_distribution<int> coin(0, 1);

    Program program;
    const int rules = rule_count(rng);
    for (int i = 0; i < rules; ++i) {
        Rule rule;
        std::vector<std::string> bound;
        const int npos = body_size(rng);
        for (int b = 0; b < npos; ++b) {
            auto [name, arity] = predicates[pred_pick(rng)];
            Atom atom{name, {}};
            for (int t = 0; t < arity; ++t) {
                if (coin(rng)) {
                    std::string v = variables[var_pick(rng)];
                    atom.terms.push_back(variable(v));
                    if (std::find(bound.begin(), bound.end(), v) == bound.end()) bound.push_back(v);
                } else {
                    atom.terms.push_back(constant(constants[const_pick(rng)]));
                }
            }
            rule.positive_body.push_back(std::move(atom));
        }
        auto safe_term = [&]() {
            if (!bound.empty() && coin(rng)) {
                std::uniform_int_distribution<std::size_t> pick(0, bound.size() - 1);
                return variable(bound[pick(rng)]);
            }
            return constant(constants[const_pick(rng)]);
        };
        auto [head_name, head_arity] = predicates[pred_pick(rng)];
        rule.head = Atom{head_name, {}};
        for (int t = 0; t < head_arity; ++t) rule.head.terms.push_back(safe_term());
        const int nneg = body_size(rng);
        for (int b = 0; b < nneg; ++b) {
            auto [name, arity] = predicates[pred_pick(rng)];
            Atom atom{name, {}};
            for (int t = 0; t < arity; ++t) atom.terms.push_back(safe_term());
            rule.negative_body.push_back(std::move(atom));
        }
        program.rules.push_back(std::move(rule));
    }
    return program;
}

} // namespace

TEST(AspParserProperty, PrintParseRoundTrip) {
    std::mt19937 rng(20240811);
    for (int i = 0; i < 300; ++i) {
        Program program = random_valid_program(rng);
        Program reparsed;
        ASSERT_NO_THROW(reparsed = parse_asp(program.to_string()))
            << "program was:\n" << program.to_string();
        EXPECT_EQ(reparsed, program) << "program was:\n" << program.to_string();
    }
}
