#pragma once

#include <string>
#include <variant>
#include <vector>

#include "emdp/rational.hpp"

namespace emdp {

enum class Sense { Maximize, Minimize };
enum class Relation { LessEq, Equal, GreaterEq };

struct Constraint {
  std::vector<Rational> coefficients;
  Relation relation = Relation::LessEq;
  Rational rhs;
  std::string name;
};

// All variables are implicitly non-negative.
struct LinearProgram {
  std::vector<std::string> variables;
  Sense sense = Sense::Maximize;
  std::vector<Rational> objective;
  std::vector<Constraint> constraints;

  std::size_t add_variable(std::string name, Rational objective_coefficient = 0);
  Constraint& add_constraint(Relation relation, Rational rhs, std::string name = {});
};

// Dual values y use the convention of the program as stated: for a maximization,
// y >= 0 on <= rows, y <= 0 on >= rows, free on = rows, and A^T y >= c.
// For a minimization the inequalities on y and A^T y flip.
struct LpOptimal {
  std::vector<Rational> assignment;
  Rational value;
  std::vector<Rational> dual;
};

// Farkas certificate: y with the sign pattern above, y^T A >= 0 (componentwise)
// and y^T b < 0, proving that no x >= 0 satisfies the constraints.
struct LpInfeasible {
  std::vector<Rational> farkas;
};

// A feasible point and a recession direction improving the objective.
struct LpUnbounded {
  std::vector<Rational> point;
  std::vector<Rational> ray;
};

using LpOutcome = std::variant<LpOptimal, LpInfeasible, LpUnbounded>;

// Two-phase primal simplex, Bland's rule, exact arithmetic. Throws
// std::invalid_argument on malformed programs.
LpOutcome solve_lp(const LinearProgram& lp);

bool is_feasible(const LinearProgram& lp, const std::vector<Rational>& x);
Rational objective_value(const LinearProgram& lp, const std::vector<Rational>& x);

// Independent re-checks of the certificates returned by solve_lp.
bool verify_optimal(const LinearProgram& lp, const LpOptimal& opt);
bool verify_infeasible(const LinearProgram& lp, const LpInfeasible& cert);
bool verify_unbounded(const LinearProgram& lp, const LpUnbounded& cert);

// Primal objective minus dual objective; zero for a verified optimum.
Rational duality_gap(const LinearProgram& lp, const LpOptimal& opt);

}  // namespace emdp
