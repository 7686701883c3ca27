#ifndef OGP_CONJECTURE_HPP
#define OGP_CONJECTURE_HPP

#include <string>
#include <vector>

namespace ogp::conjecture {

enum class StepKind { FreePoint, Midpoint, Foot, IntersectLines, CircleCenter3 };

// Input arity per step kind (FreePoint 0, Midpoint 2, Foot 3,
// IntersectLines 4, CircleCenter3 3).
int step_input_arity(StepKind kind);

struct ConstructionStep {
    StepKind kind = StepKind::FreePoint;
    std::string output;
    std::vector<std::string> inputs;
    bool operator==(const ConstructionStep&) const = default;
};

enum class GoalPredicate {
    Collinear,      // 3
    Parallel,       // 4
    Perpendicular,  // 4
    Congruent,      // 4
    Midpoint,       // 3
    EqAngle,        // 8
    Cyclic,         // 4
};

int goal_arity(GoalPredicate p);
std::string goal_name(GoalPredicate p);

struct GoalStatement {
    GoalPredicate predicate = GoalPredicate::Collinear;
    std::vector<std::string> args;
    bool operator==(const GoalStatement&) const = default;
};

// Dialect-neutral geometric statement. Points are listed in declaration
// order; step outputs are declared by their step.
struct GeoConjecture {
    std::string name;
    std::vector<std::string> points;
    std::vector<ConstructionStep> steps;
    GoalStatement goal;

    // Structural equality modulo the name field.
    bool same_statement(const GeoConjecture& o) const {
        return points == o.points && steps == o.steps && goal == o.goal;
    }
};

// The three dialect frontends. Each covers a documented subset of its
// dialect and rejects anything outside it; all throw fof::ParseError with
// a line position.
GeoConjecture parse_gcl(const std::string& text);
GeoConjecture parse_jgex(const std::string& text);
GeoConjecture parse_ggb_xml(const std::string& text);

}  // namespace ogp::conjecture

#endif
