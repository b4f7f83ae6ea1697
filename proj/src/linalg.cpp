#include "emdp/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace emdp {

SparseSystem::SparseSystem(std::size_t unknowns, std::size_t rhs_count)
    : n_(unknowns),
      k_(rhs_count),
      rows_(unknowns),
      rhs_(unknowns, std::vector<Rational>(rhs_count, Rational(0))) {}

void SparseSystem::add(std::size_t row, std::size_t col, const Rational& value) {
  if (sgn(value) != 0) rows_.at(row).emplace_back(col, value);
}

void SparseSystem::set_rhs(std::size_t row, const Rational& value, std::size_t which) {
  rhs_.at(row).at(which) = value;
}

void SparseSystem::add_rhs(std::size_t row, const Rational& value, std::size_t which) {
  rhs_.at(row).at(which) += value;
}

namespace {

struct WorkRow {
  SparseRow a;
  std::vector<Rational> b;
};

void normalize(SparseRow& row) {
  std::sort(row.begin(), row.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  SparseRow merged;
  merged.reserve(row.size());
  for (auto& [col, v] : row) {
    if (!merged.empty() && merged.back().first == col) {
      merged.back().second += v;
    } else {
      merged.emplace_back(col, std::move(v));
    }
  }
  std::erase_if(merged, [](const auto& e) { return sgn(e.second) == 0; });
  row = std::move(merged);
}

// target -= f * source, where both share the leading column, which cancels.
void eliminate(WorkRow& target, const WorkRow& source, const Rational& f) {
  SparseRow out;
  out.reserve(target.a.size() + source.a.size());
  std::size_t i = 1, j = 1;
  while (i < target.a.size() || j < source.a.size()) {
    if (j == source.a.size() || (i < target.a.size() && target.a[i].first < source.a[j].first)) {
      out.push_back(std::move(target.a[i++]));
    } else if (i == target.a.size() || source.a[j].first < target.a[i].first) {
      out.emplace_back(source.a[j].first, -f * source.a[j].second);
      ++j;
    } else {
      Rational v = target.a[i].second - f * source.a[j].second;
      if (sgn(v) != 0) out.emplace_back(target.a[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  target.a = std::move(out);
  for (std::size_t r = 0; r < target.b.size(); ++r) {
    if (sgn(source.b[r]) != 0) target.b[r] -= f * source.b[r];
  }
}

}  // namespace

std::vector<std::vector<Rational>> SparseSystem::solve() const {
  std::vector<WorkRow> work(n_);
  std::vector<std::vector<std::size_t>> bucket(n_);
  for (std::size_t r = 0; r < n_; ++r) {
    work[r].a = rows_[r];
    normalize(work[r].a);
    work[r].b = rhs_[r];
    if (work[r].a.empty()) throw std::domain_error("singular system: empty row");
    bucket[work[r].a.front().first].push_back(r);
  }
  std::vector<std::size_t> pivot_of(n_);
  for (std::size_t c = 0; c < n_; ++c) {
    auto& rows = bucket[c];
    if (rows.empty()) throw std::domain_error("singular system");
    const auto best = std::min_element(rows.begin(), rows.end(), [&](std::size_t x, std::size_t y) {
      return work[x].a.size() < work[y].a.size();
    });
    const std::size_t p = *best;
    pivot_of[c] = p;
    for (std::size_t r : rows) {
      if (r == p) continue;
      const Rational f = work[r].a.front().second / work[p].a.front().second;
      eliminate(work[r], work[p], f);
      if (work[r].a.empty()) throw std::domain_error("singular system: dependent rows");
      bucket[work[r].a.front().first].push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
  }
  std::vector<std::vector<Rational>> x(k_, std::vector<Rational>(n_, Rational(0)));
  for (std::size_t c = n_; c-- > 0;) {
    const auto& row = work[pivot_of[c]];
    for (std::size_t k = 0; k < k_; ++k) {
      Rational v = row.b[k];
      for (std::size_t e = 1; e < row.a.size(); ++e) {
        if (sgn(x[k][row.a[e].first]) != 0) v -= row.a[e].second * x[k][row.a[e].first];
      }
      x[k][c] = v / row.a.front().second;
    }
  }
  return x;
}

}  // namespace emdp
