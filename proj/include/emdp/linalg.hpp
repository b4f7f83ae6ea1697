#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "emdp/rational.hpp"

namespace emdp {

using SparseRow = std::vector<std::pair<std::size_t, Rational>>;

// Square sparse system over exact rationals, one equation per row.
class SparseSystem {
 public:
  explicit SparseSystem(std::size_t unknowns, std::size_t rhs_count = 1);

  std::size_t unknowns() const { return n_; }
  // Adds coefficient to A[row][col] (accumulating duplicates).
  void add(std::size_t row, std::size_t col, const Rational& value);
  void set_rhs(std::size_t row, const Rational& value, std::size_t which = 0);
  void add_rhs(std::size_t row, const Rational& value, std::size_t which = 0);

  // Gaussian elimination with columns processed in index order; callers order unknowns
  // so that the matrix is close to banded. Returns one solution vector per right-hand
  // side. Throws std::domain_error if singular.
  std::vector<std::vector<Rational>> solve() const;

 private:
  std::size_t n_;
  std::size_t k_;
  std::vector<SparseRow> rows_;
  std::vector<std::vector<Rational>> rhs_;
};

}  // namespace emdp
