#include "ogp/conjecture.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "ogp/fof.hpp"

namespace ogp::conjecture {

using fof::ParseError;
using fof::SourcePos;

int step_input_arity(StepKind kind) {
    switch (kind) {
        case StepKind::FreePoint: return 0;
        case StepKind::Midpoint: return 2;
        case StepKind::Foot: return 3;
        case StepKind::IntersectLines: return 4;
        case StepKind::CircleCenter3: return 3;
    }
    return 0;
}

int goal_arity(GoalPredicate p) {
    switch (p) {
        case GoalPredicate::Collinear: return 3;
        case GoalPredicate::Parallel: return 4;
        case GoalPredicate::Perpendicular: return 4;
        case GoalPredicate::Congruent: return 4;
        case GoalPredicate::Midpoint: return 3;
        case GoalPredicate::EqAngle: return 8;
        case GoalPredicate::Cyclic: return 4;
    }
    return 0;
}

std::string goal_name(GoalPredicate p) {
    switch (p) {
        case GoalPredicate::Collinear: return "collinear";
        case GoalPredicate::Parallel: return "parallel";
        case GoalPredicate::Perpendicular: return "perpendicular";
        case GoalPredicate::Congruent: return "congruent";
        case GoalPredicate::Midpoint: return "midpoint";
        case GoalPredicate::EqAngle: return "eqangle";
        case GoalPredicate::Cyclic: return "cyclic";
    }
    return "?";
}

namespace {

// Incremental validity checks shared by all three frontends.
class Builder {
public:
    void declare(const std::string& label, int line) {
        if (declared_.count(label))
            throw ParseError({line, 1}, "duplicate point label '" + label + "'");
        declared_.insert(label);
        c_.points.push_back(label);
    }

    void add_step(StepKind kind, const std::string& output,
                  const std::vector<std::string>& inputs, int line) {
        if (static_cast<int>(inputs.size()) != step_input_arity(kind))
            throw ParseError({line, 1}, "wrong number of arguments");
        for (const auto& in : inputs)
            if (!declared_.count(in))
                throw ParseError({line, 1}, "undeclared point '" + in + "'");
        if (kind != StepKind::FreePoint) declare(output, line);
        c_.steps.push_back({kind, output, inputs});
    }

    void free_point(const std::string& label, int line) {
        declare(label, line);
        c_.steps.push_back({StepKind::FreePoint, label, {}});
    }

    void set_goal(GoalPredicate pred, const std::vector<std::string>& args, int line) {
        if (has_goal_)
            throw ParseError({line, 1}, "duplicate goal statement");
        if (static_cast<int>(args.size()) != goal_arity(pred))
            throw ParseError({line, 1}, goal_name(pred) + " expects " +
                                            std::to_string(goal_arity(pred)) + " points");
        for (const auto& a : args)
            if (!declared_.count(a))
                throw ParseError({line, 1}, "undeclared point '" + a + "'");
        c_.goal = {pred, args};
        has_goal_ = true;
    }

    GeoConjecture finish(std::string name, int end_line) {
        if (!has_goal_) throw ParseError({end_line, 1}, "missing goal statement");
        c_.name = std::move(name);
        return std::move(c_);
    }

private:
    GeoConjecture c_;
    std::set<std::string> declared_;
    bool has_goal_ = false;
};

std::vector<std::string> tokenize(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

bool is_number(const std::string& s) {
    if (s.empty()) return false;
    size_t i = s[0] == '-' ? 1 : 0;
    bool digit = false, dot = false;
    for (; i < s.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            digit = true;
        } else if (s[i] == '.' && !dot) {
            dot = true;
        } else {
            return false;
        }
    }
    return digit;
}

std::optional<GoalPredicate> goal_from_word(const std::string& w) {
    static const std::map<std::string, GoalPredicate> table = {
        {"collinear", GoalPredicate::Collinear},
        {"parallel", GoalPredicate::Parallel},
        {"perpendicular", GoalPredicate::Perpendicular},
        {"congruent", GoalPredicate::Congruent},
        {"midpoint", GoalPredicate::Midpoint},
        {"eqangle", GoalPredicate::EqAngle},
        {"cyclic", GoalPredicate::Cyclic},
    };
    auto it = table.find(w);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

std::string strip_comment(const std::string& line) {
    auto pos = line.find('%');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

GeoConjecture parse_gcl(const std::string& text) {
    Builder b;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto toks = tokenize(strip_comment(raw));
        if (toks.empty()) continue;
        const std::string& kw = toks[0];
        if (kw == "point") {
            // Optional coordinates are accepted and discarded.
            if (toks.size() != 2 && toks.size() != 4)
                throw ParseError({line, 1}, "point expects a label and optional coordinates");
            if (toks.size() == 4 && (!is_number(toks[2]) || !is_number(toks[3])))
                throw ParseError({line, 1}, "point coordinates must be numeric");
            b.free_point(toks[1], line);
        } else if (kw == "midpoint") {
            if (toks.size() != 4) throw ParseError({line, 1}, "midpoint expects 3 labels");
            b.add_step(StepKind::Midpoint, toks[1], {toks[2], toks[3]}, line);
        } else if (kw == "foot") {
            if (toks.size() != 5) throw ParseError({line, 1}, "foot expects 4 labels");
            b.add_step(StepKind::Foot, toks[1], {toks[2], toks[3], toks[4]}, line);
        } else if (kw == "intersec") {
            if (toks.size() != 6) throw ParseError({line, 1}, "intersec expects 5 labels");
            b.add_step(StepKind::IntersectLines, toks[1],
                       {toks[2], toks[3], toks[4], toks[5]}, line);
        } else if (kw == "circlecenter") {
            if (toks.size() != 5) throw ParseError({line, 1}, "circlecenter expects 4 labels");
            b.add_step(StepKind::CircleCenter3, toks[1], {toks[2], toks[3], toks[4]}, line);
        } else if (kw == "prove") {
            if (toks.size() < 4 || toks[1] != "{" || toks.back() != "}")
                throw ParseError({line, 1}, "prove expects { <goal> <points...> }");
            auto pred = goal_from_word(toks[2]);
            if (!pred) throw ParseError({line, 1}, "unknown goal '" + toks[2] + "'");
            std::vector<std::string> args(toks.begin() + 3, toks.end() - 1);
            b.set_goal(*pred, args, line);
        } else {
            throw ParseError({line, 1}, "unsupported GCL statement '" + kw + "'");
        }
    }
    return b.finish("gcl", line + 1);
}

GeoConjecture parse_jgex(const std::string& text) {
    static const std::map<std::string, GoalPredicate> goals = {
        {"COLL", GoalPredicate::Collinear},   {"PARA", GoalPredicate::Parallel},
        {"PERP", GoalPredicate::Perpendicular}, {"CONG", GoalPredicate::Congruent},
        {"MIDP", GoalPredicate::Midpoint},    {"EQANGLE", GoalPredicate::EqAngle},
        {"CYCLIC", GoalPredicate::Cyclic},
    };
    Builder b;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto toks = tokenize(strip_comment(raw));
        if (toks.empty()) continue;
        const std::string& kw = toks[0];
        if (kw == "POINT") {
            if (toks.size() < 2) throw ParseError({line, 1}, "POINT expects labels");
            for (size_t i = 1; i < toks.size(); ++i) b.free_point(toks[i], line);
        } else if (kw == "MIDPOINT") {
            if (toks.size() != 4) throw ParseError({line, 1}, "MIDPOINT expects 3 labels");
            b.add_step(StepKind::Midpoint, toks[1], {toks[2], toks[3]}, line);
        } else if (kw == "FOOT") {
            if (toks.size() != 5) throw ParseError({line, 1}, "FOOT expects 4 labels");
            b.add_step(StepKind::Foot, toks[1], {toks[2], toks[3], toks[4]}, line);
        } else if (kw == "INTERSECTION") {
            if (toks.size() != 6) throw ParseError({line, 1}, "INTERSECTION expects 5 labels");
            b.add_step(StepKind::IntersectLines, toks[1],
                       {toks[2], toks[3], toks[4], toks[5]}, line);
        } else if (kw == "SHOW") {
            if (toks.size() < 2) throw ParseError({line, 1}, "SHOW expects a goal");
            auto it = goals.find(toks[1]);
            if (it == goals.end())
                throw ParseError({line, 1}, "unknown goal '" + toks[1] + "'");
            std::vector<std::string> args(toks.begin() + 2, toks.end());
            b.set_goal(it->second, args, line);
        } else {
            throw ParseError({line, 1}, "unsupported JGEX statement '" + kw + "'");
        }
    }
    return b.finish("jgex", line + 1);
}

// --- GeoGebra XML subset ------------------------------------------------

namespace {

struct XmlTag {
    std::string name;
    std::map<std::string, std::string> attrs;
    bool closing = false;       // </name>
    bool self_closing = false;  // <name ... />
    int line = 0;
};

class XmlScanner {
public:
    explicit XmlScanner(const std::string& text) : text_(text) {}

    std::optional<XmlTag> next() {
        for (;;) {
            while (i_ < text_.size() && text_[i_] != '<') bump();
            if (i_ >= text_.size()) return std::nullopt;
            if (text_.compare(i_, 4, "<!--") == 0) {
                auto end = text_.find("-->", i_);
                if (end == std::string::npos)
                    throw ParseError({line_, 1}, "unterminated XML comment");
                while (i_ < end + 3) bump();
                continue;
            }
            if (text_.compare(i_, 2, "<?") == 0) {
                auto end = text_.find("?>", i_);
                if (end == std::string::npos)
                    throw ParseError({line_, 1}, "unterminated XML declaration");
                while (i_ < end + 2) bump();
                continue;
            }
            return tag();
        }
    }

private:
    void bump() {
        if (text_[i_] == '\n') ++line_;
        ++i_;
    }

    void skip_ws() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) bump();
    }

    XmlTag tag() {
        XmlTag t;
        t.line = line_;
        bump();  // '<'
        if (i_ < text_.size() && text_[i_] == '/') {
            t.closing = true;
            bump();
        }
        size_t start = i_;
        while (i_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_'))
            bump();
        t.name = text_.substr(start, i_ - start);
        if (t.name.empty()) throw ParseError({t.line, 1}, "malformed XML tag");
        for (;;) {
            skip_ws();
            if (i_ >= text_.size()) throw ParseError({t.line, 1}, "unterminated XML tag");
            if (text_[i_] == '>') {
                bump();
                return t;
            }
            if (text_[i_] == '/') {
                bump();
                if (i_ >= text_.size() || text_[i_] != '>')
                    throw ParseError({line_, 1}, "malformed XML tag end");
                bump();
                t.self_closing = true;
                return t;
            }
            // attribute
            size_t as = i_;
            while (i_ < text_.size() && text_[i_] != '=' &&
                   !std::isspace(static_cast<unsigned char>(text_[i_])))
                bump();
            std::string key = text_.substr(as, i_ - as);
            skip_ws();
            if (i_ >= text_.size() || text_[i_] != '=')
                throw ParseError({line_, 1}, "expected '=' in XML attribute");
            bump();
            skip_ws();
            if (i_ >= text_.size() || text_[i_] != '"')
                throw ParseError({line_, 1}, "expected quoted XML attribute value");
            bump();
            size_t vs = i_;
            while (i_ < text_.size() && text_[i_] != '"') bump();
            if (i_ >= text_.size()) throw ParseError({line_, 1}, "unterminated attribute value");
            t.attrs[key] = text_.substr(vs, i_ - vs);
            bump();  // closing quote
        }
    }

    const std::string& text_;
    size_t i_ = 0;
    int line_ = 1;
};

// `AreCollinear[A,M,B]` -> (Collinear, {A,M,B})
std::pair<GoalPredicate, std::vector<std::string>> parse_prove_expr(const std::string& expr,
                                                                    int line) {
    static const std::map<std::string, GoalPredicate> table = {
        {"AreCollinear", GoalPredicate::Collinear},
        {"AreParallel", GoalPredicate::Parallel},
        {"ArePerpendicular", GoalPredicate::Perpendicular},
        {"AreCongruent", GoalPredicate::Congruent},
    };
    auto open = expr.find('[');
    auto close = expr.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ParseError({line, 1}, "malformed Prove expression '" + expr + "'");
    std::string head = expr.substr(0, open);
    auto it = table.find(head);
    if (it == table.end())
        throw ParseError({line, 1}, "unsupported Prove relation '" + head + "'");
    std::vector<std::string> args;
    std::stringstream ss(expr.substr(open + 1, close - open - 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) args.push_back(item);
    }
    return {it->second, args};
}

std::string attr_or_fail(const XmlTag& t, const std::string& key) {
    auto it = t.attrs.find(key);
    if (it == t.attrs.end())
        throw ParseError({t.line, 1},
                         "<" + t.name + "> is missing attribute '" + key + "'");
    return it->second;
}

}  // namespace

GeoConjecture parse_ggb_xml(const std::string& text) {
    static const std::map<std::string, StepKind> commands = {
        {"Midpoint", StepKind::Midpoint},
        {"Foot", StepKind::Foot},
        {"Intersect", StepKind::IntersectLines},
        {"CircleCenter", StepKind::CircleCenter3},
    };
    Builder b;
    XmlScanner scanner(text);
    int last_line = 1;
    while (auto t = scanner.next()) {
        last_line = t->line;
        if (t->closing) continue;
        if (t->name == "element") {
            if (attr_or_fail(*t, "type") != "point")
                throw ParseError({t->line, 1},
                                 "unsupported element type '" + t->attrs.at("type") + "'");
            b.free_point(attr_or_fail(*t, "label"), t->line);
        } else if (t->name == "command") {
            std::string cmd = attr_or_fail(*t, "name");
            int cmd_line = t->line;
            std::map<std::string, std::string> inputs, outputs;
            if (!t->self_closing) {
                while (auto inner = scanner.next()) {
                    if (inner->closing && inner->name == "command") break;
                    if (inner->name == "input") {
                        inputs = inner->attrs;
                    } else if (inner->name == "output") {
                        outputs = inner->attrs;
                    } else {
                        throw ParseError({inner->line, 1},
                                         "unexpected <" + inner->name + "> inside <command>");
                    }
                }
            }
            auto ordered = [&](const std::map<std::string, std::string>& attrs) {
                std::vector<std::string> vals;
                for (size_t i = 0;; ++i) {
                    auto it = attrs.find("a" + std::to_string(i));
                    if (it == attrs.end()) break;
                    vals.push_back(it->second);
                }
                return vals;
            };
            if (cmd == "Prove") {
                auto in = ordered(inputs);
                if (in.empty())
                    throw ParseError({cmd_line, 1}, "Prove command without an input");
                auto [pred, args] = parse_prove_expr(in[0], cmd_line);
                b.set_goal(pred, args, cmd_line);
                continue;
            }
            auto it = commands.find(cmd);
            if (it == commands.end())
                throw ParseError({cmd_line, 1}, "unsupported command '" + cmd + "'");
            auto in = ordered(inputs);
            auto out = ordered(outputs);
            if (out.size() != 1)
                throw ParseError({cmd_line, 1}, cmd + " expects exactly one output");
            b.add_step(it->second, out[0], in, cmd_line);
        } else if (t->name == "geogebra" || t->name == "construction") {
            // container tags of the subset
        } else {
            throw ParseError({t->line, 1}, "unsupported XML tag <" + t->name + ">");
        }
    }
    return b.finish("geogebra", last_line);
}

}  // namespace ogp::conjecture
