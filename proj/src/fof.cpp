#include "ogp/fof.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace ogp::fof {

Formula Formula::atom(std::string pred, std::vector<Term> args) {
    Formula f;
    f.kind = FormulaKind::Atom;
    f.predicate = std::move(pred);
    f.terms = std::move(args);
    return f;
}

Formula Formula::equality(Term lhs, Term rhs, bool negated) {
    Formula f;
    f.kind = FormulaKind::Equality;
    f.terms = {std::move(lhs), std::move(rhs)};
    f.negated_equality = negated;
    return f;
}

Formula Formula::negation(Formula g) {
    Formula f;
    f.kind = FormulaKind::Not;
    f.children = {std::move(g)};
    return f;
}

Formula Formula::conjunction(std::vector<Formula> fs) {
    Formula f;
    f.kind = FormulaKind::And;
    f.children = std::move(fs);
    return f;
}

Formula Formula::disjunction(std::vector<Formula> fs) {
    Formula f;
    f.kind = FormulaKind::Or;
    f.children = std::move(fs);
    return f;
}

Formula Formula::implies(Formula lhs, Formula rhs) {
    Formula f;
    f.kind = FormulaKind::Implies;
    f.children = {std::move(lhs), std::move(rhs)};
    return f;
}

Formula Formula::iff(Formula lhs, Formula rhs) {
    Formula f;
    f.kind = FormulaKind::Iff;
    f.children = {std::move(lhs), std::move(rhs)};
    return f;
}

Formula Formula::forall(std::vector<std::string> vars, Formula body) {
    Formula f;
    f.kind = FormulaKind::Forall;
    f.bound_vars = std::move(vars);
    f.children = {std::move(body)};
    return f;
}

Formula Formula::exists(std::vector<std::string> vars, Formula body) {
    Formula f;
    f.kind = FormulaKind::Exists;
    f.bound_vars = std::move(vars);
    f.children = {std::move(body)};
    return f;
}

std::string role_name(Role r) {
    switch (r) {
        case Role::Axiom: return "axiom";
        case Role::Hypothesis: return "hypothesis";
        case Role::Definition: return "definition";
        case Role::Conjecture: return "conjecture";
    }
    return "?";
}

std::optional<Role> role_from_name(const std::string& s) {
    if (s == "axiom") return Role::Axiom;
    if (s == "hypothesis") return Role::Hypothesis;
    if (s == "definition") return Role::Definition;
    if (s == "conjecture") return Role::Conjecture;
    return std::nullopt;
}

// --- Lexer ------------------------------------------------------------

namespace {

enum class Tok {
    LowerWord,   // [a-z][A-Za-z0-9_]*
    UpperWord,   // [A-Z][A-Za-z0-9_]*
    Quoted,      // 'path'
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Not,        // ~
    And,        // &
    Or,         // |
    Implies,    // =>
    Iff,        // <=>
    Eq,         // =
    Neq,        // !=
    Bang,       // ! (quantifier)
    Question,   // ?
    End,
};

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_ws_and_comments();
        SourcePos here{line_, col_};
        if (i_ >= text_.size()) return {Tok::End, "", here};
        char c = text_[i_];
        if (std::islower(static_cast<unsigned char>(c))) return word(Tok::LowerWord, here);
        if (std::isupper(static_cast<unsigned char>(c))) return word(Tok::UpperWord, here);
        if (c == '\'') return quoted(here);
        switch (c) {
            case '(': advance(); return {Tok::LParen, "(", here};
            case ')': advance(); return {Tok::RParen, ")", here};
            case '[': advance(); return {Tok::LBracket, "[", here};
            case ']': advance(); return {Tok::RBracket, "]", here};
            case ',': advance(); return {Tok::Comma, ",", here};
            case '.': advance(); return {Tok::Dot, ".", here};
            case ':': advance(); return {Tok::Colon, ":", here};
            case '~': advance(); return {Tok::Not, "~", here};
            case '&': advance(); return {Tok::And, "&", here};
            case '|': advance(); return {Tok::Or, "|", here};
            case '?': advance(); return {Tok::Question, "?", here};
            case '!':
                advance();
                if (peek() == '=') {
                    advance();
                    return {Tok::Neq, "!=", here};
                }
                return {Tok::Bang, "!", here};
            case '=':
                advance();
                if (peek() == '>') {
                    advance();
                    return {Tok::Implies, "=>", here};
                }
                return {Tok::Eq, "=", here};
            case '<':
                advance();
                if (peek() == '=' && i_ + 1 < text_.size() && text_[i_ + 1] == '>') {
                    advance();
                    advance();
                    return {Tok::Iff, "<=>", here};
                }
                throw ParseError(here, "unexpected character '<'");
            default:
                throw ParseError(here, std::string("unexpected character '") + c + "'");
        }
    }

private:
    char peek() const { return i_ < text_.size() ? text_[i_] : '\0'; }

    void advance() {
        if (i_ < text_.size()) {
            if (text_[i_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++i_;
        }
    }

    void skip_ws_and_comments() {
        for (;;) {
            while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_])))
                advance();
            if (i_ < text_.size() && text_[i_] == '%') {
                while (i_ < text_.size() && text_[i_] != '\n') advance();
                continue;
            }
            break;
        }
    }

    Token word(Tok kind, SourcePos here) {
        size_t start = i_;
        while (i_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_'))
            advance();
        return {kind, text_.substr(start, i_ - start), here};
    }

    Token quoted(SourcePos here) {
        advance();  // opening quote
        size_t start = i_;
        while (i_ < text_.size() && text_[i_] != '\'' && text_[i_] != '\n') advance();
        if (peek() != '\'') throw ParseError(here, "unterminated quoted string");
        std::string s = text_.substr(start, i_ - start);
        advance();  // closing quote
        return {Tok::Quoted, s, here};
    }

    const std::string& text_;
    size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// --- Parser -----------------------------------------------------------

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) { shift(); }

    FofDocument parse_document() {
        FofDocument doc;
        std::set<std::string> names;
        bool saw_conjecture = false;
        while (cur_.kind != Tok::End) {
            if (cur_.kind != Tok::LowerWord)
                throw ParseError(cur_.pos, "expected 'fof' or 'include'");
            if (cur_.text == "include") {
                shift();
                expect(Tok::LParen, "'('");
                if (cur_.kind != Tok::Quoted)
                    throw ParseError(cur_.pos, "expected quoted include path");
                doc.includes.push_back(cur_.text);
                shift();
                expect(Tok::RParen, "')'");
                expect(Tok::Dot, "'.'");
            } else if (cur_.text == "fof") {
                SourcePos span = cur_.pos;
                shift();
                expect(Tok::LParen, "'('");
                if (cur_.kind != Tok::LowerWord)
                    throw ParseError(cur_.pos, "expected formula name");
                std::string name = cur_.text;
                SourcePos name_pos = cur_.pos;
                shift();
                expect(Tok::Comma, "','");
                if (cur_.kind != Tok::LowerWord)
                    throw ParseError(cur_.pos, "expected formula role");
                auto role = role_from_name(cur_.text);
                if (!role)
                    throw ParseError(cur_.pos, "unknown role '" + cur_.text + "'");
                shift();
                expect(Tok::Comma, "','");
                Formula f = parse_formula();
                expect(Tok::RParen, "')'");
                expect(Tok::Dot, "'.'");
                if (!names.insert(name).second)
                    throw ParseError(name_pos, "duplicate formula name '" + name + "'");
                if (*role == Role::Conjecture) {
                    if (saw_conjecture)
                        throw ParseError(name_pos, "more than one conjecture");
                    saw_conjecture = true;
                }
                doc.formulas.push_back({name, *role, std::move(f), span});
            } else {
                throw ParseError(cur_.pos, "expected 'fof' or 'include'");
            }
        }
        return doc;
    }

    Formula parse_formula() {
        Formula first = parse_unitary();
        switch (cur_.kind) {
            case Tok::And:
            case Tok::Or: {
                Tok op = cur_.kind;
                std::vector<Formula> parts;
                parts.push_back(std::move(first));
                while (cur_.kind == op) {
                    shift();
                    parts.push_back(parse_unitary());
                }
                if (cur_.kind == Tok::And || cur_.kind == Tok::Or)
                    throw ParseError(cur_.pos, "mixed '&' and '|' require parentheses");
                return op == Tok::And ? Formula::conjunction(std::move(parts))
                                      : Formula::disjunction(std::move(parts));
            }
            case Tok::Implies: {
                shift();
                Formula rhs = parse_unitary();
                return Formula::implies(std::move(first), std::move(rhs));
            }
            case Tok::Iff: {
                shift();
                Formula rhs = parse_unitary();
                return Formula::iff(std::move(first), std::move(rhs));
            }
            default:
                return first;
        }
    }

private:
    void shift() { cur_ = lexer_.next(); }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind)
            throw ParseError(cur_.pos, std::string("expected ") + what +
                                           (cur_.kind == Tok::End ? " at end of input" : ""));
        shift();
    }

    Formula parse_unitary() {
        switch (cur_.kind) {
            case Tok::Not: {
                shift();
                return Formula::negation(parse_unitary());
            }
            case Tok::Bang:
            case Tok::Question: {
                bool universal = cur_.kind == Tok::Bang;
                shift();
                expect(Tok::LBracket, "'['");
                std::vector<std::string> vars;
                std::set<std::string> seen;
                for (;;) {
                    if (cur_.kind != Tok::UpperWord)
                        throw ParseError(cur_.pos, "expected variable name");
                    if (!seen.insert(cur_.text).second)
                        throw ParseError(cur_.pos,
                                         "duplicate quantified variable '" + cur_.text + "'");
                    vars.push_back(cur_.text);
                    shift();
                    if (cur_.kind == Tok::Comma) {
                        shift();
                        continue;
                    }
                    break;
                }
                expect(Tok::RBracket, "']'");
                expect(Tok::Colon, "':'");
                Formula body = parse_unitary();
                return universal ? Formula::forall(std::move(vars), std::move(body))
                                 : Formula::exists(std::move(vars), std::move(body));
            }
            case Tok::LParen: {
                shift();
                Formula f = parse_formula();
                expect(Tok::RParen, "')'");
                return f;
            }
            case Tok::LowerWord:
            case Tok::UpperWord: {
                Term lhs = parse_term();
                if (cur_.kind == Tok::Eq || cur_.kind == Tok::Neq) {
                    bool neg = cur_.kind == Tok::Neq;
                    shift();
                    Term rhs = parse_term();
                    return Formula::equality(std::move(lhs), std::move(rhs), neg);
                }
                if (lhs.is_variable)
                    throw ParseError(cur_.pos, "variable cannot stand as a formula");
                return Formula::atom(std::move(lhs.symbol), std::move(lhs.args));
            }
            default:
                throw ParseError(cur_.pos,
                                 cur_.kind == Tok::End ? "unexpected end of input"
                                                       : "expected formula");
        }
    }

    Term parse_term() {
        if (cur_.kind == Tok::UpperWord) {
            Term t = Term::variable(cur_.text);
            shift();
            return t;
        }
        if (cur_.kind != Tok::LowerWord)
            throw ParseError(cur_.pos, "expected term");
        std::string sym = cur_.text;
        shift();
        std::vector<Term> args;
        if (cur_.kind == Tok::LParen) {
            shift();
            for (;;) {
                args.push_back(parse_term());
                if (cur_.kind == Tok::Comma) {
                    shift();
                    continue;
                }
                break;
            }
            expect(Tok::RParen, "')'");
        }
        return Term::function(std::move(sym), std::move(args));
    }

    Lexer lexer_;
    Token cur_{Tok::End, "", {}};
};

}  // namespace

FofDocument parse_fof(const std::string& text) {
    Parser p(text);
    return p.parse_document();
}

// --- Printer ----------------------------------------------------------

std::string print_term(const Term& t) {
    std::string s = t.symbol;
    if (!t.args.empty()) {
        s += '(';
        for (size_t i = 0; i < t.args.size(); ++i) {
            if (i) s += ',';
            s += print_term(t.args[i]);
        }
        s += ')';
    }
    return s;
}

namespace {

bool is_binary(const Formula& f) {
    switch (f.kind) {
        case FormulaKind::And:
        case FormulaKind::Or:
        case FormulaKind::Implies:
        case FormulaKind::Iff:
            return true;
        default:
            return false;
    }
}

// Unitary position: anything binary needs parentheses.
std::string print_unitary(const Formula& f);

std::string print_any(const Formula& f) {
    switch (f.kind) {
        case FormulaKind::And:
        case FormulaKind::Or: {
            const char* op = f.kind == FormulaKind::And ? " & " : " | ";
            std::string s;
            for (size_t i = 0; i < f.children.size(); ++i) {
                if (i) s += op;
                s += print_unitary(f.children[i]);
            }
            return s;
        }
        case FormulaKind::Implies:
        case FormulaKind::Iff:
            return print_unitary(f.children[0]) +
                   (f.kind == FormulaKind::Implies ? " => " : " <=> ") +
                   print_unitary(f.children[1]);
        default:
            return print_unitary(f);
    }
}

std::string print_unitary(const Formula& f) {
    switch (f.kind) {
        case FormulaKind::Atom:
            return print_term(Term::function(f.predicate, f.terms));
        case FormulaKind::Equality:
            return print_term(f.terms[0]) + (f.negated_equality ? " != " : " = ") +
                   print_term(f.terms[1]);
        case FormulaKind::Not:
            return "~" + print_unitary(f.children[0]);
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            std::string s = f.kind == FormulaKind::Forall ? "![" : "?[";
            for (size_t i = 0; i < f.bound_vars.size(); ++i) {
                if (i) s += ',';
                s += f.bound_vars[i];
            }
            s += "]: ";
            s += print_unitary(f.children[0]);
            return s;
        }
        default:
            return "(" + print_any(f) + ")";
    }
}

}  // namespace

std::string print_formula(const Formula& f) { return print_any(f); }

std::string print_fof(const FofDocument& doc) {
    std::string out;
    for (const auto& inc : doc.includes) out += "include('" + inc + "').\n";
    for (const auto& af : doc.formulas)
        out += "fof(" + af.name + "," + role_name(af.role) + "," + print_formula(af.formula) +
               ").\n";
    return out;
}

// --- Include resolution -----------------------------------------------

namespace {

void flatten_into(const FofDocument& doc, const std::string& own_dir,
                  const std::vector<std::string>& search_paths,
                  std::set<std::string>& active, std::vector<AnnotatedFormula>& out) {
    std::vector<AnnotatedFormula> included;
    for (const auto& inc : doc.includes) {
        fs::path found;
        std::vector<std::string> roots = search_paths;
        if (!own_dir.empty()) roots.push_back(own_dir);
        for (const auto& root : roots) {
            fs::path cand = fs::path(root) / inc;
            if (fs::exists(cand)) {
                found = cand;
                break;
            }
        }
        if (found.empty()) {
            std::string msg = "include file not found: '" + inc + "' (searched:";
            for (const auto& r : roots) msg += " " + (r.empty() ? std::string(".") : r);
            msg += ")";
            throw std::runtime_error(msg);
        }
        std::string key = fs::weakly_canonical(found).string();
        if (!active.insert(key).second)
            throw std::runtime_error("include cycle through '" + inc + "'");
        std::ifstream in(found);
        std::stringstream buf;
        buf << in.rdbuf();
        FofDocument sub = parse_fof(buf.str());
        flatten_into(sub, found.parent_path().string(), search_paths, active, included);
        active.erase(key);
    }
    out.insert(out.end(), included.begin(), included.end());
    out.insert(out.end(), doc.formulas.begin(), doc.formulas.end());
}

}  // namespace

FofDocument resolve_includes(const FofDocument& doc,
                             const std::vector<std::string>& search_paths) {
    if (doc.includes.empty()) return doc;
    FofDocument flat;
    std::set<std::string> active;
    flatten_into(doc, "", search_paths, active, flat.formulas);
    std::set<std::string> names;
    int conjectures = 0;
    for (const auto& af : flat.formulas) {
        if (!names.insert(af.name).second)
            throw std::runtime_error("formula name collision across includes: '" + af.name +
                                     "'");
        if (af.role == Role::Conjecture && ++conjectures > 1)
            throw std::runtime_error("more than one conjecture after include resolution");
    }
    return flat;
}

// --- Horn extraction --------------------------------------------------

std::string to_string(const GroundAtom& a) {
    std::string s = a.predicate + "(";
    for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ',';
        s += a.args[i];
    }
    return s + ")";
}

namespace {

bool term_as_horn(const Term& t, HornTermRef& out) {
    if (!t.args.empty()) return false;  // only constants and variables
    out = {t.is_variable, t.symbol};
    return true;
}

bool formula_as_atom(const Formula& f, HornAtom& out) {
    if (f.kind != FormulaKind::Atom) return false;
    out.predicate = f.predicate;
    out.args.clear();
    for (const auto& t : f.terms) {
        HornTermRef r;
        if (!term_as_horn(t, r)) return false;
        out.args.push_back(r);
    }
    return true;
}

bool atom_is_ground(const HornAtom& a) {
    return std::none_of(a.args.begin(), a.args.end(),
                        [](const HornTermRef& r) { return r.is_variable; });
}

GroundAtom to_ground(const HornAtom& a) {
    GroundAtom g;
    g.predicate = a.predicate;
    for (const auto& r : a.args) g.args.push_back(r.name);
    return g;
}

[[noreturn]] void horn_error(const AnnotatedFormula& af, const std::string& why) {
    throw std::runtime_error("formula '" + af.name + "': " + why);
}

}  // namespace

HornProblem to_horn_rules(const FofDocument& doc) {
    if (!doc.includes.empty())
        throw std::runtime_error("document still has unresolved includes");
    HornProblem out;
    bool have_goal = false;
    for (const auto& af : doc.formulas) {
        if (af.role == Role::Conjecture) {
            HornAtom a;
            if (!formula_as_atom(af.formula, a) || !atom_is_ground(a))
                horn_error(af, "conjecture must be a ground atom");
            out.goal = to_ground(a);
            out.goal_name = af.name;
            have_goal = true;
            continue;
        }
        // Ground atom: a fact regardless of role.
        HornAtom a;
        if (formula_as_atom(af.formula, a)) {
            if (!atom_is_ground(a)) horn_error(af, "free variables in a fact");
            out.facts.push_back({af.name, to_ground(a)});
            continue;
        }
        // Otherwise: ![Vars]: (a1 & ... & an => c).
        const Formula* f = &af.formula;
        if (f->kind != FormulaKind::Forall)
            horn_error(af, "not a ground atom or universally quantified implication");
        const Formula* body = &f->children[0];
        if (body->kind != FormulaKind::Implies)
            horn_error(af, "quantified formula is not an implication");
        std::vector<const Formula*> premise_formulas;
        const Formula& lhs = body->children[0];
        if (lhs.kind == FormulaKind::And) {
            for (const auto& c : lhs.children) premise_formulas.push_back(&c);
        } else {
            premise_formulas.push_back(&lhs);
        }
        HornRule rule;
        rule.id = af.name;
        std::set<std::string> premise_vars;
        for (const Formula* pf : premise_formulas) {
            HornAtom a2;
            if (!formula_as_atom(*pf, a2))
                horn_error(af, "premise is not an atom (non-Horn axiom)");
            if (a2.predicate == "distinct") {
                if (a2.args.size() != 2) horn_error(af, "distinct/2 expects two arguments");
                rule.guards.emplace_back(a2.args[0].name, a2.args[1].name);
                continue;
            }
            for (const auto& arg : a2.args)
                if (arg.is_variable) premise_vars.insert(arg.name);
            rule.premises.push_back(std::move(a2));
        }
        if (rule.premises.empty()) horn_error(af, "rule has no premises");
        HornAtom concl;
        if (!formula_as_atom(body->children[1], concl))
            horn_error(af, "conclusion is not an atom (non-Horn axiom)");
        for (const auto& arg : concl.args)
            if (arg.is_variable && !premise_vars.count(arg.name))
                horn_error(af, "variable " + arg.name + " in conclusion is not range-restricted");
        for (const auto& [x, y] : rule.guards) {
            auto bound = [&](const std::string& v) {
                return !std::isupper(static_cast<unsigned char>(v[0])) || premise_vars.count(v);
            };
            if (!bound(x) || !bound(y))
                horn_error(af, "distinct guard uses a variable not bound by any premise");
        }
        rule.conclusion = std::move(concl);
        out.rules.push_back(std::move(rule));
    }
    if (!have_goal) throw std::runtime_error("document has no conjecture");
    return out;
}

}  // namespace ogp::fof
