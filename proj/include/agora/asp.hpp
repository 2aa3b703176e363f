#pragma once

// Answer-set solving for a safe, function-free subset of normal logic
// programs: facts and rules `head :- a, b, not c.`, negation as failure,
// no aggregates, no arithmetic, no classical negation. Programs at this
// scale are grounded by full substitution and solved by exhaustive
// subset enumeration against the Gelfond-Lifschitz condition.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "agora/errors.hpp"
#include "agora/util.hpp"

namespace agora::asp {

struct Term {
    enum class Kind { constant, variable };
    Kind kind = Kind::constant;
    std::string text;

    bool is_variable() const { return kind == Kind::variable; }
    auto operator<=>(const Term&) const = default;
};

inline Term constant(std::string text) { return {Term::Kind::constant, std::move(text)}; }
inline Term variable(std::string text) { return {Term::Kind::variable, std::move(text)}; }

struct Atom {
    std::string predicate;
    std::vector<Term> terms;

    bool ground() const {
        return std::none_of(terms.begin(), terms.end(), [](const Term& t) { return t.is_variable(); });
    }

    std::string to_string() const {
        if (terms.empty()) return predicate;
        std::string out = predicate + "(";
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (i) out += ",";
            out += terms[i].text;
        }
        out += ")";
        return out;
    }

    auto operator<=>(const Atom&) const = default;
};

struct Rule {
    Atom head;
    std::vector<Atom> positive_body;
    std::vector<Atom> negative_body;

    bool is_fact() const { return positive_body.empty() && negative_body.empty(); }

    bool ground() const {
        if (!head.ground()) return false;
        for (const auto& a : positive_body)
            if (!a.ground()) return false;
        for (const auto& a : negative_body)
            if (!a.ground()) return false;
        return true;
    }

    std::string to_string() const {
        std::string out = head.to_string();
        if (!is_fact()) {
            out += " :- ";
            bool first = true;
            for (const auto& a : positive_body) {
                if (!first) out += ", ";
                out += a.to_string();
                first = false;
            }
            for (const auto& a : negative_body) {
                if (!first) out += ", ";
                out += "not " + a.to_string();
                first = false;
            }
        }
        out += ".";
        return out;
    }

    auto operator<=>(const Rule&) const = default;
};

struct Program {
    std::vector<Rule> rules;

    // Herbrand universe: every constant appearing anywhere in the program.
    std::set<std::string> constants() const {
        std::set<std::string> out;
        auto scan = [&out](const Atom& a) {
            for (const auto& t : a.terms)
                if (!t.is_variable()) out.insert(t.text);
        };
        for (const auto& r : rules) {
            scan(r.head);
            for (const auto& a : r.positive_body) scan(a);
            for (const auto& a : r.negative_body) scan(a);
        }
        return out;
    }

    std::string to_string() const {
        std::string out;
        for (const auto& r : rules) {
            out += r.to_string();
            out += "\n";
        }
        return out;
    }

    auto operator<=>(const Program&) const = default;
};

// --- Parser ------------------------------------------------------------------

namespace detail {

struct Token {
    enum class Kind { ident, variable, lparen, rparen, comma, dot, implied_by, kw_not, end };
    Kind kind;
    std::string text;
    int line;
    int column;
};

inline std::string describe(const Token& t) {
    if (t.kind == Token::Kind::end) return "end of input";
    return "'" + t.text + "'";
}

inline std::vector<Token> lex(std::string_view source) {
    std::vector<Token> tokens;
    int line = 1, column = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (source[i + k] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        i += n;
    };
    while (i < source.size()) {
        char c = source[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '%') {
            while (i < source.size() && source[i] != '\n') advance(1);
            continue;
        }
        int tl = line, tc = column;
        if (c == '(') { tokens.push_back({Token::Kind::lparen, "(", tl, tc}); advance(1); continue; }
        if (c == ')') { tokens.push_back({Token::Kind::rparen, ")", tl, tc}); advance(1); continue; }
        if (c == ',') { tokens.push_back({Token::Kind::comma, ",", tl, tc}); advance(1); continue; }
        if (c == '.') { tokens.push_back({Token::Kind::dot, ".", tl, tc}); advance(1); continue; }
        if (c == ':') {
            if (i + 1 < source.size() && source[i + 1] == '-') {
                tokens.push_back({Token::Kind::implied_by, ":-", tl, tc});
                advance(2);
                continue;
            }
            throw AspSyntaxError(tl, tc, "expected ':-' but found a lone ':'");
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
            std::size_t start = i;
            while (i < source.size() &&
                   (std::isalnum(static_cast<unsigned char>(source[i])) || source[i] == '_'))
                advance(1);
            std::string text(source.substr(start, i - start));
            if (text == "not") {
                tokens.push_back({Token::Kind::kw_not, text, tl, tc});
            } else if (c >= 'a' && c <= 'z') {
                tokens.push_back({Token::Kind::ident, text, tl, tc});
            } else {
                tokens.push_back({Token::Kind::variable, text, tl, tc});
            }
            continue;
        }
        throw AspSyntaxError(tl, tc, std::string("unexpected character '") + c +
                                         "' (identifiers start with a letter)");
    }
    tokens.push_back({Token::Kind::end, "", line, column});
    return tokens;
}

class Parser {
public:
    explicit Parser(std::string_view source) : tokens_(lex(source)) {}

    Program parse() {
        Program program;
        while (peek().kind != Token::Kind::end) program.rules.push_back(parse_rule());
        check_safety(program);
        return program;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    Token take() { return tokens_[pos_++]; }

    [[noreturn]] void fail(const Token& at, const std::string& detail) {
        throw AspSyntaxError(at.line, at.column, detail);
    }

    Rule parse_rule() {
        Rule rule;
        if (peek().kind == Token::Kind::kw_not)
            fail(peek(), "negation is not allowed in a rule head");
        rule.head = parse_atom();
        if (peek().kind == Token::Kind::dot) {
            take();
            return rule;
        }
        if (peek().kind != Token::Kind::implied_by)
            fail(peek(), "expected '.' or ':-' after the rule head, found " + describe(peek()));
        take();
        while (true) {
            if (peek().kind == Token::Kind::kw_not) {
                take();
                if (peek().kind == Token::Kind::kw_not)
                    fail(peek(), "expected an atom after 'not', found 'not'");
                rule.negative_body.push_back(parse_atom());
            } else {
                rule.positive_body.push_back(parse_atom());
            }
            if (peek().kind == Token::Kind::comma) {
                take();
                continue;
            }
            if (peek().kind == Token::Kind::dot) {
                take();
                break;
            }
            fail(peek(), "expected ',' or '.' after a body literal, found " + describe(peek()));
        }
        return rule;
    }

    Atom parse_atom() {
        if (peek().kind != Token::Kind::ident)
            fail(peek(), "expected a predicate name (lowercase identifier), found " + describe(peek()));
        Token name = take();
        Atom atom;
        atom.predicate = name.text;
        if (peek().kind == Token::Kind::lparen) {
            take();
            while (true) {
                if (peek().kind == Token::Kind::ident) {
                    atom.terms.push_back(constant(take().text));
                } else if (peek().kind == Token::Kind::variable) {
                    atom.terms.push_back(variable(take().text));
                } else {
                    fail(peek(), "expected a term (constant or variable), found " + describe(peek()));
                }
                if (peek().kind == Token::Kind::comma) {
                    take();
                    continue;
                }
                if (peek().kind == Token::Kind::rparen) {
                    take();
                    break;
                }
                fail(peek(), "expected ',' or ')' in the argument list, found " + describe(peek()));
            }
        }
        auto [it, inserted] = arities_.emplace(atom.predicate, atom.terms.size());
        if (!inserted && it->second != atom.terms.size())
            fail(name, "predicate '" + atom.predicate + "' used with " + std::to_string(atom.terms.size()) +
                           " arguments but earlier with " + std::to_string(it->second));
        return atom;
    }

    static void collect_variables(const Atom& atom, std::vector<std::string>& out) {
        for (const auto& t : atom.terms)
            if (t.is_variable() && std::find(out.begin(), out.end(), t.text) == out.end())
                out.push_back(t.text);
    }

    // Safety: every variable in the head or a negative literal must occur in
    // the positive body, so grounding is finite and negation is well-defined.
    static void check_safety(const Program& program) {
        for (std::size_t i = 0; i < program.rules.size(); ++i) {
            const Rule& r = program.rules[i];
            std::vector<std::string> positive;
            for (const auto& a : r.positive_body) collect_variables(a, positive);
            std::vector<std::string> restricted;
            collect_variables(r.head, restricted);
            for (const auto& a : r.negative_body) collect_variables(a, restricted);
            for (const auto& v : restricted)
                if (std::find(positive.begin(), positive.end(), v) == positive.end())
                    throw AspSafetyError(i, v);
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::map<std::string, std::size_t> arities_;
};

} // namespace detail

// Parses the `.lp` grammar. Throws AspSyntaxError with line/column and an
// expected-token hint, or AspSafetyError; both messages are designed to be
// fed back to the translating LLM on retry.
inline Program parse_asp(std::string_view source) { return detail::Parser(source).parse(); }

// --- Grounding ---------------------------------------------------------------

namespace detail {

inline std::vector<std::string> rule_variables(const Rule& r) {
    std::vector<std::string> vars;
    auto scan = [&vars](const Atom& a) {
        for (const auto& t : a.terms)
            if (t.is_variable() && std::find(vars.begin(), vars.end(), t.text) == vars.end())
                vars.push_back(t.text);
    };
    scan(r.head);
    for (const auto& a : r.positive_body) scan(a);
    for (const auto& a : r.negative_body) scan(a);
    return vars;
}

inline Atom substitute(const Atom& atom, const std::map<std::string, std::string>& binding) {
    Atom out;
    out.predicate = atom.predicate;
    out.terms.reserve(atom.terms.size());
    for (const auto& t : atom.terms) {
        if (t.is_variable())
            out.terms.push_back(constant(binding.at(t.text)));
        else
            out.terms.push_back(t);
    }
    return out;
}

inline unsigned long long saturating_pow(unsigned long long base, std::size_t exp,
                                         unsigned long long limit) {
    unsigned long long r = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (base != 0 && r > limit / base) return limit + 1;
        r *= base;
    }
    return r;
}

} // namespace detail

inline constexpr std::size_t kDefaultGroundingCap = 10000;

// Replaces every variable by every constant combination from the Herbrand
// universe. Rules whose variables cannot be bound (empty universe) ground to
// nothing. The instance count is estimated up front against the cap.
inline Program ground(const Program& program, std::size_t max_instances = kDefaultGroundingCap) {
    std::set<std::string> universe_set = program.constants();
    std::vector<std::string> universe(universe_set.begin(), universe_set.end());

    unsigned long long estimate = 0;
    const unsigned long long limit = std::numeric_limits<unsigned long long>::max() / 2;
    for (const auto& r : program.rules) {
        auto vars = detail::rule_variables(r);
        unsigned long long instances =
            vars.empty() ? 1 : detail::saturating_pow(universe.size(), vars.size(), limit);
        estimate = (estimate > limit - instances) ? limit : estimate + instances;
    }
    if (estimate > max_instances) throw GroundingTooLarge(estimate);

    Program out;
    for (const auto& r : program.rules) {
        auto vars = detail::rule_variables(r);
        if (vars.empty()) {
            out.rules.push_back(r);
            continue;
        }
        if (universe.empty()) continue;
        std::vector<std::size_t> odometer(vars.size(), 0);
        while (true) {
            std::map<std::string, std::string> binding;
            for (std::size_t i = 0; i < vars.size(); ++i) binding[vars[i]] = universe[odometer[i]];
            Rule grounded;
            grounded.head = detail::substitute(r.head, binding);
            for (const auto& a : r.positive_body)
                grounded.positive_body.push_back(detail::substitute(a, binding));
            for (const auto& a : r.negative_body)
                grounded.negative_body.push_back(detail::substitute(a, binding));
            out.rules.push_back(std::move(grounded));

            // Odometer: last variable varies fastest.
            std::size_t pos = vars.size();
            while (pos > 0) {
                --pos;
                if (++odometer[pos] < universe.size()) break;
                odometer[pos] = 0;
                if (pos == 0) goto rule_done;
            }
        }
    rule_done:;
    }
    return out;
}

// --- Stable models -----------------------------------------------------------

struct StableModelSet {
    // Each model holds its atoms sorted by canonical text; models are sorted
    // lexicographically over those atom lists.
    std::vector<std::vector<Atom>> models;
    std::size_t atom_universe_size = 0;

    bool operator==(const StableModelSet&) const = default;
};

inline constexpr std::size_t kDefaultSolverAtomCap = 20;

// Exhaustive enumeration: a candidate set S is a stable model iff S equals
// the least model of the Gelfond-Lifschitz reduct of the program w.r.t. S.
// Exponential in the atom universe, hence the cap; desk-scale programs from
// conversation facts stay far below it.
inline StableModelSet stable_models(const Program& program,
                                    std::size_t max_atoms = kDefaultSolverAtomCap) {
    for (const auto& r : program.rules)
        if (!r.ground())
            throw std::invalid_argument("stable_models requires a ground program; call ground() first");

    std::map<std::string, Atom> universe;
    auto note = [&universe](const Atom& a) { universe.emplace(a.to_string(), a); };
    for (const auto& r : program.rules) {
        note(r.head);
        for (const auto& a : r.positive_body) note(a);
        for (const auto& a : r.negative_body) note(a);
    }
    const std::size_t n = universe.size();
    if (n > max_atoms) throw UniverseTooLarge(n);

    std::map<std::string, std::size_t> index;
    std::vector<Atom> atoms;
    for (const auto& [name, atom] : universe) {
        index[name] = atoms.size();
        atoms.push_back(atom);
    }

    struct RuleMask {
        std::uint32_t head = 0, pos = 0, neg = 0;
    };
    std::vector<RuleMask> masks;
    masks.reserve(program.rules.size());
    for (const auto& r : program.rules) {
        RuleMask m;
        m.head = 1u << index.at(r.head.to_string());
        for (const auto& a : r.positive_body) m.pos |= 1u << index.at(a.to_string());
        for (const auto& a : r.negative_body) m.neg |= 1u << index.at(a.to_string());
        masks.push_back(m);
    }

    StableModelSet result;
    result.atom_universe_size = n;
    const std::uint64_t subsets = 1ull << n;
    for (std::uint64_t candidate = 0; candidate < subsets; ++candidate) {
        const auto s = static_cast<std::uint32_t>(candidate);
        // Least model of the reduct by fixpoint iteration.
        std::uint32_t lm = 0;
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& m : masks) {
                if ((m.neg & s) == 0 && (m.pos & lm) == m.pos && (lm & m.head) == 0) {
                    lm |= m.head;
                    changed = true;
                }
            }
        }
        if (lm == s) {
            std::vector<Atom> model;
            for (std::size_t i = 0; i < n; ++i)
                if (s & (1u << i)) model.push_back(atoms[i]);
            result.models.push_back(std::move(model));
        }
    }

    // Atoms within a model are already in canonical text order (the universe
    // map is sorted); order the models themselves the same way.
    std::sort(result.models.begin(), result.models.end(),
              [](const std::vector<Atom>& a, const std::vector<Atom>& b) {
                  auto key = [](const std::vector<Atom>& m) {
                      std::vector<std::string> k;
                      k.reserve(m.size());
                      for (const auto& atom : m) k.push_back(atom.to_string());
                      return k;
                  };
                  return key(a) < key(b);
              });
    return result;
}

inline std::string render_model(const std::vector<Atom>& model) {
    std::vector<std::string> names;
    names.reserve(model.size());
    for (const auto& a : model) names.push_back(a.to_string());
    std::sort(names.begin(), names.end());
    return "{" + join(names, ", ") + "}";
}

// One model per line in canonical order; the empty set of models has the
// fixed rendering used by answer synthesis.
inline std::string render_models(const StableModelSet& set) {
    if (set.models.empty()) return "no consistent answer";
    std::vector<std::string> lines;
    lines.reserve(set.models.size());
    for (const auto& m : set.models) lines.push_back(render_model(m));
    return join(lines, "\n");
}

} // namespace agora::asp
