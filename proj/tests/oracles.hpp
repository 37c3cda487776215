// Test-only reference computations. Nothing here goes through quantile
// functions or the library's solvers.
#ifndef LICORM_TESTS_ORACLES_HPP
#define LICORM_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "licorm/measures.hpp"
#include "licorm/random.hpp"

namespace oracle {

/// Cell masses of an n x k plan, row-major.
using Plan = std::vector<double>;

/// Solves the transportation equalities restricted to `cells`, which must
/// form a spanning tree of the bipartite row/column graph. Returns false if
/// they do not.
inline bool tree_solution(const std::vector<double>& a, const std::vector<double>& b,
                          const std::vector<std::size_t>& cells, Plan& plan)
{
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  std::vector<double> supply(a);
  supply.insert(supply.end(), b.begin(), b.end());
  std::vector<std::vector<std::size_t>> incident(n + k);
  for (std::size_t e = 0; e < cells.size(); ++e) {
    incident[cells[e] / k].push_back(e);
    incident[n + cells[e] % k].push_back(e);
  }
  std::vector<bool> done(cells.size(), false);
  std::vector<std::size_t> degree(n + k);
  for (std::size_t v = 0; v < n + k; ++v) degree[v] = incident[v].size();
  plan.assign(n * k, 0.0);
  std::size_t solved = 0;
  bool progress = true;
  while (solved < cells.size() && progress) {
    progress = false;
    for (std::size_t v = 0; v < n + k; ++v) {
      if (degree[v] != 1) continue;
      std::size_t e = 0;
      for (std::size_t cand : incident[v])
        if (!done[cand]) e = cand;
      const std::size_t row = cells[e] / k;
      const std::size_t col = n + cells[e] % k;
      const std::size_t other = v == row ? col : row;
      const double mass = supply[v];
      plan[cells[e]] = mass;
      supply[v] = 0.0;
      supply[other] -= mass;
      done[e] = true;
      --degree[v];
      --degree[other];
      ++solved;
      progress = true;
    }
  }
  return solved == cells.size();
}

/// Maximum of sum x_i y_j pi_ij over the transportation polytope with
/// marginals (a, b), by enumeration of all basic solutions.
inline double transport_max_by_vertices(const std::vector<double>& xs, const std::vector<double>& a,
                                        const std::vector<double>& ys, const std::vector<double>& b)
{
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  const std::size_t cells = n * k;
  const std::size_t basis = n + k - 1;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(basis);
  std::iota(pick.begin(), pick.end(), 0);
  Plan plan;
  while (true) {
    if (tree_solution(a, b, pick, plan) &&
        std::all_of(plan.begin(), plan.end(), [](double v) { return v >= -1e-14; })) {
      double obj = 0.0;
      for (std::size_t c = 0; c < cells; ++c) obj += xs[c / k] * ys[c % k] * plan[c];
      best = std::max(best, obj);
    }
    // next combination
    std::size_t i = basis;
    while (i > 0 && pick[i - 1] == cells - basis + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < basis; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

inline double transport_max_by_vertices(const licorm::DiscreteMeasure& m, const licorm::DiscreteMeasure& r)
{
  std::vector<double> xs, a, ys, b;
  for (const auto& at : m.atoms()) {
    xs.push_back(at.position);
    a.push_back(at.weight);
  }
  for (const auto& at : r.atoms()) {
    ys.push_back(at.position);
    b.push_back(at.weight);
  }
  return transport_max_by_vertices(xs, a, ys, b);
}

/// Number of candidate bases examined by transport_max_by_vertices.
inline double basis_count(std::size_t n, std::size_t k)
{
  const std::size_t cells = n * k;
  const std::size_t basis = n + k - 1;
  double c = 1.0;
  for (std::size_t i = 0; i < basis; ++i) c = c * static_cast<double>(cells - i) / static_cast<double>(i + 1);
  return c;
}

/// max c.x subject to A x = b, x >= 0 (b >= 0): dense two-phase tableau
/// simplex with Bland's rule.
inline double simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                          const std::vector<double>& c)
{
  constexpr double eps = 1e-12;
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  const std::size_t rows = A.size();
  const std::size_t n = c.size();
  const std::size_t width = n + rows + 1;
  std::vector<std::vector<double>> T(rows, std::vector<double>(width, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][width - 1] = b[i];
    basis[i] = n + i;
  }
  auto pivot = [&](std::size_t r, std::size_t col) {
    const double p = T[r][col];
    for (double& v : T[r]) v /= p;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || T[i][col] == 0.0) continue;
      const double f = T[i][col];
      for (std::size_t k = 0; k < width; ++k) T[i][k] -= f * T[r][k];
    }
    basis[r] = col;
  };
  auto optimize = [&](const std::vector<double>& cost, std::size_t ncols) {
    while (true) {
      std::size_t enter = none;
      for (std::size_t j = 0; j < ncols && enter == none; ++j) {
        if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
        double rc = cost[j];
        for (std::size_t i = 0; i < rows; ++i) rc -= cost[basis[i]] * T[i][j];
        if (rc > eps) enter = j;
      }
      if (enter == none) return;
      std::size_t leave = none;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows; ++i) {
        if (T[i][enter] <= eps) continue;
        const double ratio = T[i][width - 1] / T[i][enter];
        if (leave == none || ratio < best - eps || (ratio <= best + eps && basis[i] < basis[leave])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave == none) throw std::runtime_error("unbounded LP");
      pivot(leave, enter);
    }
  };

  std::vector<double> phase1(n + rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) phase1[n + i] = -1.0;
  optimize(phase1, n + rows);
  for (std::size_t i = 0; i < rows; ++i) {
    if (basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(T[i][j]) > eps && std::find(basis.begin(), basis.end(), j) == basis.end()) {
        pivot(i, j);
        break;
      }
    }
  }
  std::vector<double> phase2(c);
  phase2.resize(n + rows, 0.0);
  optimize(phase2, n);
  double value = 0.0;
  for (std::size_t i = 0; i < rows; ++i) value += phase2[basis[i]] * T[i][width - 1];
  return value;
}

/// Maximum of sum x_i y_j pi_ij over the transportation polytope by the simplex method.
inline double transport_max_by_simplex(const std::vector<double>& xs, const std::vector<double>& a,
                                       const std::vector<double>& ys, const std::vector<double>& b)
{
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  std::vector<std::vector<double>> A(n + k, std::vector<double>(n * k, 0.0));
  std::vector<double> rhs(a);
  rhs.insert(rhs.end(), b.begin(), b.end());
  std::vector<double> cost(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      A[i][i * k + j] = 1.0;
      A[n + j][i * k + j] = 1.0;
      cost[i * k + j] = xs[i] * ys[j];
    }
  }
  return simplex_max(A, rhs, cost);
}

inline double transport_max_by_simplex(const licorm::DiscreteMeasure& m, const licorm::DiscreteMeasure& r)
{
  std::vector<double> xs, a, ys, b;
  for (const auto& at : m.atoms()) {
    xs.push_back(at.position);
    a.push_back(at.weight);
  }
  for (const auto& at : r.atoms()) {
    ys.push_back(at.position);
    b.push_back(at.weight);
  }
  return transport_max_by_simplex(xs, a, ys, b);
}

/// Northwest-corner plan after permuting rows and columns: always a vertex
/// of the transportation polytope, with exact marginals.
inline Plan northwest_corner(const std::vector<double>& a, const std::vector<double>& b,
                             const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols)
{
  const std::size_t k = b.size();
  Plan plan(a.size() * k, 0.0);
  std::vector<double> ra(a), rb(b);
  std::size_t i = 0, j = 0;
  while (i < rows.size() && j < cols.size()) {
    const double mass = std::min(ra[rows[i]], rb[cols[j]]);
    plan[rows[i] * k + cols[j]] += mass;
    ra[rows[i]] -= mass;
    rb[cols[j]] -= mass;
    if (ra[rows[i]] <= rb[cols[j]])
      ++i;
    else
      ++j;
  }
  return plan;
}

/// Random feasible plan: a random convex combination of a few randomly
/// ordered northwest-corner vertices.
inline Plan random_plan(licorm::SplitMix64& rng, const std::vector<double>& a, const std::vector<double>& b)
{
  const std::size_t pieces = rng.between(1, 3);
  Plan out(a.size() * b.size(), 0.0);
  std::vector<double> mix(pieces);
  double total = 0.0;
  for (double& w : mix) total += (w = rng.uniform(0.1, 1.0));
  for (std::size_t p = 0; p < pieces; ++p) {
    std::vector<std::size_t> rows(a.size()), cols(b.size());
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.index(i)]);
    for (std::size_t i = cols.size(); i > 1; --i) std::swap(cols[i - 1], cols[rng.index(i)]);
    const auto plan = northwest_corner(a, b, rows, cols);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += mix[p] / total * plan[c];
  }
  return out;
}

/// Rockafellar-Uryasev objective t + E[(X - t)_+] / (1 - beta).
inline double ru_objective(const licorm::DiscreteMeasure& m, double beta, double t)
{
  double s = 0.0;
  for (const auto& a : m.atoms()) s += a.weight * std::max(0.0, a.position - t);
  return t + s / (1.0 - beta);
}

struct GridMin
{
  double value;
  double arg;
};

/// Dense uniform grid minimization of f over [lo, hi].
inline GridMin grid_minimize(const std::function<double(double)>& f, double lo, double hi, std::size_t points)
{
  GridMin best{std::numeric_limits<double>::infinity(), lo};
  for (std::size_t i = 0; i < points; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    const double v = f(t);
    if (v < best.value) best = {v, t};
  }
  return best;
}

/// Grid minimization followed by ternary refinement around the best grid point.
inline GridMin grid_then_refine(const std::function<double(double)>& f, double lo, double hi, std::size_t points)
{
  auto g = grid_minimize(f, lo, hi, points);
  const double h = (hi - lo) / static_cast<double>(points - 1);
  double a = g.arg - h;
  double b = g.arg + h;
  for (int it = 0; it < 200; ++it) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    if (f(m1) <= f(m2))
      b = m2;
    else
      a = m1;
  }
  const double t = 0.5 * (a + b);
  if (f(t) < g.value) g = {f(t), t};
  return g;
}

/// Higher-moment objective written out directly.
inline double higher_moment_objective(const licorm::DiscreteMeasure& m, double p, double c, double t)
{
  double s = 0.0;
  for (const auto& a : m.atoms()) s += a.weight * std::pow(std::max(0.0, a.position - t), p);
  return t + c * std::pow(s, 1.0 / p);
}

} // namespace oracle

#endif // LICORM_TESTS_ORACLES_HPP
