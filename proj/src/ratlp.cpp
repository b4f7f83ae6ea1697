#include "emdp/ratlp.hpp"

#include <optional>
#include <stdexcept>

namespace emdp {

std::size_t LinearProgram::add_variable(std::string name, Rational objective_coefficient) {
  variables.push_back(std::move(name));
  objective.push_back(std::move(objective_coefficient));
  for (auto& c : constraints) c.coefficients.emplace_back(0);
  return variables.size() - 1;
}

Constraint& LinearProgram::add_constraint(Relation relation, Rational rhs, std::string name) {
  constraints.push_back(
      {std::vector<Rational>(variables.size(), Rational(0)), relation, std::move(rhs),
       std::move(name)});
  return constraints.back();
}

namespace {

void check_well_formed(const LinearProgram& lp) {
  if (lp.variables.empty()) throw std::invalid_argument("linear program has no variables");
  if (lp.objective.size() != lp.variables.size()) {
    throw std::invalid_argument("objective length does not match variable count");
  }
  for (const auto& c : lp.constraints) {
    if (c.coefficients.size() != lp.variables.size()) {
      throw std::invalid_argument("constraint '" + c.name + "' has wrong coefficient count");
    }
  }
}

Relation flip(Relation r) {
  switch (r) {
    case Relation::LessEq: return Relation::GreaterEq;
    case Relation::GreaterEq: return Relation::LessEq;
    case Relation::Equal: return Relation::Equal;
  }
  return r;
}

class Tableau {
 public:
  explicit Tableau(const LinearProgram& lp) : n_(lp.variables.size()), m_(lp.constraints.size()) {
    flipped_.assign(m_, false);
    std::vector<Relation> rel(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      rel[i] = lp.constraints[i].relation;
      if (lp.constraints[i].rhs < 0) {
        flipped_[i] = true;
        rel[i] = flip(rel[i]);
      }
    }
    // Column layout: originals, then one slack/surplus per inequality row, then artificials.
    std::size_t col = n_;
    slack_col_.assign(m_, npos);
    art_col_.assign(m_, npos);
    for (std::size_t i = 0; i < m_; ++i) {
      if (rel[i] != Relation::Equal) slack_col_[i] = col++;
    }
    first_art_ = col;
    for (std::size_t i = 0; i < m_; ++i) {
      if (rel[i] != Relation::LessEq) art_col_[i] = col++;
    }
    width_ = col;
    rows_.assign(m_, std::vector<Rational>(width_, Rational(0)));
    rhs_.resize(m_);
    basis_.resize(m_);
    init_col_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& c = lp.constraints[i];
      const int sign = flipped_[i] ? -1 : 1;
      for (std::size_t j = 0; j < n_; ++j) rows_[i][j] = sign * c.coefficients[j];
      rhs_[i] = sign * c.rhs;
      if (rel[i] == Relation::LessEq) {
        rows_[i][slack_col_[i]] = 1;
        basis_[i] = init_col_[i] = slack_col_[i];
      } else {
        if (rel[i] == Relation::GreaterEq) rows_[i][slack_col_[i]] = -1;
        rows_[i][art_col_[i]] = 1;
        basis_[i] = init_col_[i] = art_col_[i];
      }
    }
    cost_.assign(width_, Rational(0));
    reduced_.assign(width_, Rational(0));
  }

  bool is_artificial(std::size_t col) const { return col >= first_art_; }

  void set_costs(std::vector<Rational> cost) {
    cost_ = std::move(cost);
    for (std::size_t j = 0; j < width_; ++j) {
      Rational d = cost_[j];
      for (std::size_t i = 0; i < m_; ++i) {
        if (sgn(rows_[i][j]) != 0) d -= cost_[basis_[i]] * rows_[i][j];
      }
      reduced_[j] = std::move(d);
    }
  }

  Rational objective() const {
    Rational v = 0;
    for (std::size_t i = 0; i < m_; ++i) v += cost_[basis_[i]] * rhs_[i];
    return v;
  }

  // Runs Bland's rule to optimality. Returns the entering column of an unbounded
  // direction, or nullopt at an optimum.
  std::optional<std::size_t> optimize(bool allow_artificial) {
    for (;;) {
      std::optional<std::size_t> entering;
      for (std::size_t j = 0; j < width_; ++j) {
        if (!allow_artificial && is_artificial(j)) continue;
        if (sgn(reduced_[j]) > 0) {
          entering = j;
          break;
        }
      }
      if (!entering) return std::nullopt;
      const std::size_t j = *entering;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t i = 0; i < m_; ++i) {
        if (sgn(rows_[i][j]) <= 0) continue;
        Rational ratio = rhs_[i] / rows_[i][j];
        if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
          leave = i;
          best = std::move(ratio);
        }
      }
      if (!leave) return j;
      pivot(*leave, j);
    }
  }

  void pivot(std::size_t r, std::size_t j) {
    const Rational p = rows_[r][j];
    std::vector<std::size_t> nz;
    for (std::size_t k = 0; k < width_; ++k) {
      if (sgn(rows_[r][k]) != 0) {
        rows_[r][k] /= p;
        nz.push_back(k);
      }
    }
    rhs_[r] /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || sgn(rows_[i][j]) == 0) continue;
      const Rational f = rows_[i][j];
      for (std::size_t k : nz) rows_[i][k] -= f * rows_[r][k];
      rhs_[i] -= f * rhs_[r];
    }
    if (sgn(reduced_[j]) != 0) {
      const Rational f = reduced_[j];
      for (std::size_t k : nz) reduced_[k] -= f * rows_[r][k];
    }
    basis_[r] = j;
  }

  // Pivots basic artificials at level zero out of the basis where possible.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      for (std::size_t j = 0; j < first_art_; ++j) {
        if (sgn(rows_[i][j]) != 0) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  std::vector<Rational> primal() const {
    std::vector<Rational> x(n_, Rational(0));
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) x[basis_[i]] = rhs_[i];
    }
    return x;
  }

  // Duals of the original rows, for the maximization the tableau solves.
  std::vector<Rational> duals() const {
    std::vector<Rational> y(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      Rational v = cost_[init_col_[i]] - reduced_[init_col_[i]];
      y[i] = flipped_[i] ? Rational(-v) : v;
    }
    return y;
  }

  std::vector<Rational> ray(std::size_t j) const {
    std::vector<Rational> d(n_, Rational(0));
    if (j < n_) d[j] = 1;
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) d[basis_[i]] = -rows_[i][j];
    }
    return d;
  }

  std::size_t width() const { return width_; }
  std::size_t art_col(std::size_t i) const { return art_col_[i]; }
  std::size_t rows() const { return m_; }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t n_, m_, width_ = 0, first_art_ = 0;
  std::vector<bool> flipped_;
  std::vector<std::size_t> slack_col_, art_col_, init_col_, basis_;
  std::vector<std::vector<Rational>> rows_;
  std::vector<Rational> rhs_, cost_, reduced_;
};

Rational row_activity(const Constraint& c, const std::vector<Rational>& x) {
  Rational v = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (sgn(c.coefficients[j]) != 0) v += c.coefficients[j] * x[j];
  }
  return v;
}

bool satisfies(Relation r, const Rational& lhs, const Rational& rhs) {
  switch (r) {
    case Relation::LessEq: return lhs <= rhs;
    case Relation::Equal: return lhs == rhs;
    case Relation::GreaterEq: return lhs >= rhs;
  }
  return false;
}

// Sign pattern of a maximization dual: >= 0 on <=, <= 0 on >=, free on =.
bool max_dual_sign_ok(Relation r, const Rational& y) {
  switch (r) {
    case Relation::LessEq: return sgn(y) >= 0;
    case Relation::GreaterEq: return sgn(y) <= 0;
    case Relation::Equal: return true;
  }
  return false;
}

}  // namespace

LpOutcome solve_lp(const LinearProgram& lp) {
  check_well_formed(lp);
  Tableau tab(lp);
  const std::size_t n = lp.variables.size();

  std::vector<Rational> phase1(tab.width(), Rational(0));
  bool any_artificial = false;
  for (std::size_t i = 0; i < tab.rows(); ++i) {
    if (const auto a = tab.art_col(i); a != static_cast<std::size_t>(-1)) {
      phase1[a] = -1;
      any_artificial = true;
    }
  }
  if (any_artificial) {
    tab.set_costs(phase1);
    tab.optimize(true);
    if (sgn(tab.objective()) < 0) return LpInfeasible{tab.duals()};
    tab.expel_artificials();
  }

  std::vector<Rational> phase2(tab.width(), Rational(0));
  for (std::size_t j = 0; j < n; ++j) {
    phase2[j] = lp.sense == Sense::Maximize ? lp.objective[j] : Rational(-lp.objective[j]);
  }
  tab.set_costs(phase2);
  if (const auto unbounded = tab.optimize(false)) {
    return LpUnbounded{tab.primal(), tab.ray(*unbounded)};
  }
  LpOptimal opt;
  opt.assignment = tab.primal();
  opt.value = objective_value(lp, opt.assignment);
  opt.dual = tab.duals();
  if (lp.sense == Sense::Minimize) {
    for (auto& y : opt.dual) y = -y;
  }
  return opt;
}

bool is_feasible(const LinearProgram& lp, const std::vector<Rational>& x) {
  if (x.size() != lp.variables.size()) return false;
  for (const auto& v : x) {
    if (sgn(v) < 0) return false;
  }
  for (const auto& c : lp.constraints) {
    if (!satisfies(c.relation, row_activity(c, x), c.rhs)) return false;
  }
  return true;
}

Rational objective_value(const LinearProgram& lp, const std::vector<Rational>& x) {
  Rational v = 0;
  for (std::size_t j = 0; j < x.size(); ++j) v += lp.objective[j] * x[j];
  return v;
}

Rational duality_gap(const LinearProgram& lp, const LpOptimal& opt) {
  Rational dual_value = 0;
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    dual_value += lp.constraints[i].rhs * opt.dual[i];
  }
  return objective_value(lp, opt.assignment) - dual_value;
}

bool verify_optimal(const LinearProgram& lp, const LpOptimal& opt) {
  if (!is_feasible(lp, opt.assignment)) return false;
  if (opt.dual.size() != lp.constraints.size()) return false;
  if (objective_value(lp, opt.assignment) != opt.value) return false;
  const bool maximize = lp.sense == Sense::Maximize;
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    const Rational y = maximize ? opt.dual[i] : Rational(-opt.dual[i]);
    if (!max_dual_sign_ok(lp.constraints[i].relation, y)) return false;
  }
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    Rational aty = 0;
    for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
      aty += lp.constraints[i].coefficients[j] * opt.dual[i];
    }
    if (maximize ? aty < lp.objective[j] : aty > lp.objective[j]) return false;
  }
  return sgn(duality_gap(lp, opt)) == 0;
}

bool verify_infeasible(const LinearProgram& lp, const LpInfeasible& cert) {
  if (cert.farkas.size() != lp.constraints.size()) return false;
  Rational yb = 0;
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    if (!max_dual_sign_ok(lp.constraints[i].relation, cert.farkas[i])) return false;
    yb += cert.farkas[i] * lp.constraints[i].rhs;
  }
  if (sgn(yb) >= 0) return false;
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    Rational v = 0;
    for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
      v += cert.farkas[i] * lp.constraints[i].coefficients[j];
    }
    if (sgn(v) < 0) return false;
  }
  return true;
}

bool verify_unbounded(const LinearProgram& lp, const LpUnbounded& cert) {
  if (!is_feasible(lp, cert.point)) return false;
  if (cert.ray.size() != lp.variables.size()) return false;
  for (const auto& d : cert.ray) {
    if (sgn(d) < 0) return false;
  }
  for (const auto& c : lp.constraints) {
    if (!satisfies(c.relation, row_activity(c, cert.ray), Rational(0))) return false;
  }
  const Rational gain = objective_value(lp, cert.ray);
  return lp.sense == Sense::Maximize ? sgn(gain) > 0 : sgn(gain) < 0;
}

}  // namespace emdp
