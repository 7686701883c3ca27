#ifndef OGP_FOF_HPP
#define OGP_FOF_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ogp::fof {

struct SourcePos {
    int line = 0;
    int column = 0;
};

// Parse/validation failure with the position of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(SourcePos pos, const std::string& what)
        : std::runtime_error("line " + std::to_string(pos.line) + ", column " +
                             std::to_string(pos.column) + ": " + what),
          pos_(pos) {}
    SourcePos pos() const { return pos_; }

private:
    SourcePos pos_;
};

// A first-order term: a variable ([A-Z]...) or a function application
// ([a-z]...); arity 0 means constant.
struct Term {
    bool is_variable = false;
    std::string symbol;
    std::vector<Term> args;

    static Term variable(std::string name) { return Term{true, std::move(name), {}}; }
    static Term constant(std::string name) { return Term{false, std::move(name), {}}; }
    static Term function(std::string name, std::vector<Term> a) {
        return Term{false, std::move(name), std::move(a)};
    }

    bool operator==(const Term&) const = default;
};

enum class FormulaKind {
    Atom,
    Equality,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Forall,
    Exists,
};

struct Formula {
    FormulaKind kind = FormulaKind::Atom;
    // Atom: predicate + terms; Equality: terms = {lhs, rhs}.
    std::string predicate;
    std::vector<Term> terms;
    bool negated_equality = false;
    // Not: 1 child; And/Or: >= 2; Implies/Iff: 2; quantifiers: 1 (the body).
    std::vector<Formula> children;
    std::vector<std::string> bound_vars;  // quantifiers only, duplicate-free

    bool operator==(const Formula&) const = default;

    static Formula atom(std::string pred, std::vector<Term> args);
    static Formula equality(Term lhs, Term rhs, bool negated = false);
    static Formula negation(Formula f);
    static Formula conjunction(std::vector<Formula> fs);
    static Formula disjunction(std::vector<Formula> fs);
    static Formula implies(Formula lhs, Formula rhs);
    static Formula iff(Formula lhs, Formula rhs);
    static Formula forall(std::vector<std::string> vars, Formula body);
    static Formula exists(std::vector<std::string> vars, Formula body);
};

enum class Role { Axiom, Hypothesis, Definition, Conjecture };

std::string role_name(Role r);
std::optional<Role> role_from_name(const std::string& s);

struct AnnotatedFormula {
    std::string name;
    Role role = Role::Axiom;
    Formula formula;
    SourcePos span;

    bool operator==(const AnnotatedFormula& o) const {
        return name == o.name && role == o.role && formula == o.formula;
    }
};

struct FofDocument {
    std::vector<std::string> includes;
    std::vector<AnnotatedFormula> formulas;

    bool operator==(const FofDocument& o) const {
        return includes == o.includes && formulas == o.formulas;
    }
};

// Parses `include('path').` and `fof(name, role, formula).` items with
// %-comments. Throws ParseError on malformed input, duplicate names,
// unknown roles or a second conjecture.
FofDocument parse_fof(const std::string& text);

// Canonical text form: one item per line, includes first, minimal
// parentheses. parse_fof(print_fof(d)) is structurally equal to d.
std::string print_fof(const FofDocument& doc);
std::string print_formula(const Formula& f);
std::string print_term(const Term& t);

// Replaces include directives by the formulas of the included files,
// prepended in include order. Search order: the given paths, then the
// directory of the including file.
FofDocument resolve_includes(const FofDocument& doc,
                             const std::vector<std::string>& search_paths);

// --- Horn extraction -------------------------------------------------

struct HornTermRef {
    bool is_variable = false;
    std::string name;
    bool operator==(const HornTermRef&) const = default;
};

struct HornAtom {
    std::string predicate;
    std::vector<HornTermRef> args;
    bool operator==(const HornAtom&) const = default;
};

struct GroundAtom {
    std::string predicate;
    std::vector<std::string> args;
    bool operator==(const GroundAtom&) const = default;
    bool operator<(const GroundAtom& o) const {
        if (predicate != o.predicate) return predicate < o.predicate;
        return args < o.args;
    }
};

std::string to_string(const GroundAtom& a);

struct HornRule {
    std::string id;
    std::vector<HornAtom> premises;                           // no distinct/2 here
    std::vector<std::pair<std::string, std::string>> guards;  // distinct(X,Y) pairs
    HornAtom conclusion;
};

struct NamedFact {
    std::string name;  // formula name, cited by proofs
    GroundAtom atom;
};

struct HornProblem {
    std::vector<NamedFact> facts;
    std::vector<HornRule> rules;
    GroundAtom goal;
    std::string goal_name;
};

// Reads an include-free document as a Horn problem: hypotheses and ground
// axioms become facts, universally quantified implications become
// range-restricted rules, the conjecture becomes the ground goal.
// distinct/2 premises are split off as guards. Equality is rejected.
HornProblem to_horn_rules(const FofDocument& doc);

}  // namespace ogp::fof

#endif
