#ifndef LICORM_DUALSOLVER_HPP
#define LICORM_DUALSOLVER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "licorm/error.hpp"
#include "licorm/measures.hpp"
#include "licorm/numeric.hpp"
#include "licorm/random.hpp"
#include "licorm/transport.hpp"

namespace licorm {

/// Potential g on the generator support, pinned so that g[0] = 0.
class DualPotential
{
public:
  static DualPotential zeros(std::size_t free_dim) { return DualPotential(std::vector<double>(free_dim + 1, 0.0)); }

  /// Takes values on the whole support and shifts them so that g[0] = 0;
  /// the dual objective is invariant under that shift.
  static DualPotential pinned(std::vector<double> g)
  {
    detail::require(!g.empty(), ErrorCode::EmptyInput, "potential is empty");
    for (double v : g) detail::require(std::isfinite(v), ErrorCode::NonFiniteValue, "potential must be finite");
    const double g0 = g[0];
    for (double& v : g) v -= g0;
    g[0] = 0.0;
    return DualPotential(std::move(g));
  }

  /// Builds (0, g_1, ..., g_K) from the free coordinates.
  static DualPotential from_free(std::span<const double> free)
  {
    std::vector<double> g(free.size() + 1, 0.0);
    std::copy(free.begin(), free.end(), g.begin() + 1);
    return pinned(std::move(g));
  }

  const std::vector<double>& values() const noexcept { return g_; }
  double operator[](std::size_t k) const noexcept { return g_[k]; }
  std::size_t size() const noexcept { return g_.size(); }

private:
  explicit DualPotential(std::vector<double> g) : g_(std::move(g)) {}

  std::vector<double> g_;
};

struct IndexedValue
{
  double value;
  std::size_t index;
};

/// g*(x) = max_k x y_k - g_k over the generator support, lowest index on ties.
inline IndexedValue eval_conjugate(const DualPotential& g, const GeneratorSet& set, double x) noexcept
{
  const auto& ys = set.support();
  IndexedValue best{x * ys[0] - g[0], 0};
  for (std::size_t k = 1; k < ys.size(); ++k) {
    const double v = x * ys[k] - g[k];
    if (v > best.value) best = {v, k};
  }
  return best;
}

/// sigma_R(g): largest <g, r> over the vertices, lowest index on ties.
/// Coincides with the support function of the convex hull.
inline IndexedValue support_function(const GeneratorSet& set, const DualPotential& g) noexcept
{
  IndexedValue best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t v = 0; v < set.vertex_count(); ++v) {
    CompensatedSum s;
    const auto& r = set.vertex(v);
    for (std::size_t k = 0; k < r.size(); ++k) s += r[k] * g[k];
    if (s.value() > best.value) best = {s.value(), v};
  }
  return best;
}

/// Value of the finite-dimensional dual at g together with one subgradient.
struct DualEvaluation
{
  double value;
  /// Subgradient with respect to (g_0, ..., g_K); entry 0 is always zero.
  std::vector<double> subgradient;
  std::size_t vertex;
};

inline DualEvaluation dual_subgradient(const DiscreteMeasure& m, const GeneratorSet& set, const DualPotential& g)
{
  DualEvaluation out;
  out.subgradient.assign(set.support().size(), 0.0);
  CompensatedSum conj;
  for (const Atom& a : m.atoms()) {
    const auto c = eval_conjugate(g, set, a.position);
    conj += a.weight * c.value;
    out.subgradient[c.index] -= a.weight;
  }
  const auto sigma = support_function(set, g);
  const auto& r = set.vertex(sigma.index);
  for (std::size_t k = 0; k < r.size(); ++k) out.subgradient[k] += r[k];
  out.subgradient[0] = 0.0;
  conj += sigma.value;
  out.value = conj.value();
  out.vertex = sigma.index;
  return out;
}

/// J(g) = integral of g* against m plus sigma_R(g). Upper bound on the hull value for every g.
inline double dual_objective(const DiscreteMeasure& m, const GeneratorSet& set, const DualPotential& g)
{
  CompensatedSum s;
  for (const Atom& a : m.atoms()) s += a.weight * eval_conjugate(g, set, a.position).value;
  s += support_function(set, g).value;
  return s.value();
}

/// One pass of double conjugation: f = g*, then g~ = f* on the generator
/// support, re-pinned. Returns g unchanged when rounding would make the
/// refined potential evaluate higher, so the dual objective never increases.
inline DualPotential double_conjugate_refine(const DiscreteMeasure& m, const GeneratorSet& set, const DualPotential& g)
{
  std::vector<double> xs;
  std::vector<double> f;
  xs.reserve(m.size());
  f.reserve(m.size());
  for (const Atom& a : m.atoms()) {
    xs.push_back(a.position);
    f.push_back(eval_conjugate(g, set, a.position).value);
  }
  std::vector<double> refined(set.support().size());
  for (std::size_t k = 0; k < refined.size(); ++k) refined[k] = c_transform(xs, f, set.support()[k]);
  auto out = DualPotential::pinned(std::move(refined));
  if (dual_objective(m, set, out) > dual_objective(m, set, g)) return g;
  return out;
}

enum class StepRule {
  Auto,        ///< diminishing until a primal lower bound is known, Polyak afterwards
  Diminishing, ///< s0 / sqrt(k) along the normalized subgradient
};

struct SolverOptions
{
  std::size_t max_iters = 50'000;
  std::size_t fw_max_iters = 2'000;
  double target_gap = 1e-6;
  std::uint64_t seed = 0;
  StepRule step_rule = StepRule::Auto;

  void validate() const
  {
    detail::require(max_iters > 0 && fw_max_iters > 0, ErrorCode::BadOptions, "iteration limits must be positive");
    detail::require(std::isfinite(target_gap) && target_gap >= 0.0, ErrorCode::BadOptions,
                    "target gap must be a finite nonnegative real");
  }

  /// Absolute tolerance induced at a given primal value.
  double tolerance_at(double primal) const noexcept { return target_gap * (1.0 + std::abs(primal)); }
};

struct TracePoint
{
  std::size_t iteration;
  double value;
};

enum class SolveStatus { Converged, IterLimit };

struct DualSolution
{
  DualPotential g;
  double value;
  std::vector<TracePoint> trace;
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::IterLimit;
};

namespace detail {

inline double dual_step_scale(const DiscreteMeasure& m, const GeneratorSet& set)
{
  const double xscale = m.range() > 0.0 ? m.range() : std::max(1.0, std::abs(m.min()));
  return xscale * std::max(1.0, set.support().back());
}

inline std::vector<double> linear_potential(const DiscreteMeasure& m, const GeneratorSet& set)
{
  const double mean = expectation(m);
  std::vector<double> g;
  for (double y : set.support()) g.push_back(mean * y);
  return g;
}

} // namespace detail

/// Projected subgradient descent on the pinned dual J over R^K.
///
/// `primal_lower`, when given, enables Polyak steps and the convergence
/// test J(g) - primal_lower <= target. Without it the chi value of the
/// best vertex is used, which is exact for singleton targets.
inline DualSolution solve_dual_subgradient(const DiscreteMeasure& m, const GeneratorSet& set,
                                           const SolverOptions& opts = {},
                                           std::optional<double> primal_lower = std::nullopt,
                                           std::optional<DualPotential> start = std::nullopt)
{
  opts.validate();
  const std::size_t dim = set.support().size();
  const double lower = primal_lower ? *primal_lower : chi_generators(m, set, true).value;
  const bool polyak = opts.step_rule == StepRule::Auto;
  const double tol = opts.tolerance_at(lower);
  const double s0 = detail::dual_step_scale(m, set);

  std::vector<double> g = start ? start->values() : DualPotential::pinned(detail::linear_potential(m, set)).values();
  DualSolution out{DualPotential::pinned(g), std::numeric_limits<double>::infinity(), {}, 0, SolveStatus::IterLimit};

  SplitMix64 rng(opts.seed);
  std::size_t since_improvement = 0;
  std::size_t epoch_start = 0;
  const std::size_t stall_limit = std::max<std::size_t>(1000, opts.max_iters / 20);

  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    const auto cur = DualPotential::pinned(g);
    const auto ev = dual_subgradient(m, set, cur);
    out.iterations = it + 1;
    if (ev.value < out.value) {
      out.value = ev.value;
      out.g = cur;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (it % 1000 == 0) out.trace.push_back({it, out.value});
    if (out.value - lower <= tol) {
      out.status = SolveStatus::Converged;
      break;
    }
    double norm2 = 0.0;
    for (std::size_t k = 1; k < dim; ++k) norm2 += ev.subgradient[k] * ev.subgradient[k];
    if (norm2 == 0.0) {
      // Zero subgradient: g minimizes J, so J(g) is the hull value.
      out.status = SolveStatus::Converged;
      break;
    }

    if (since_improvement >= stall_limit) {
      // Restart from a perturbation of the best iterate.
      g = out.g.values();
      const double radius = s0 / std::sqrt(static_cast<double>(it + 1));
      for (std::size_t k = 1; k < dim; ++k) g[k] += radius * (2.0 * rng.uniform() - 1.0);
      since_improvement = 0;
      epoch_start = it;
      continue;
    }

    double step;
    if (polyak)
      step = (ev.value - lower) / norm2;
    else
      step = s0 / std::sqrt(static_cast<double>(it - epoch_start + 1)) / std::sqrt(norm2);
    for (std::size_t k = 1; k < dim; ++k) g[k] -= step * ev.subgradient[k];
  }
  out.trace.push_back({out.iterations, out.value});
  return out;
}

struct FrankWolfeResult
{
  std::vector<double> lambda;
  double value;
  DiscreteMeasure mixture;
  /// Smallest dual objective met along the way, from the linearization potentials.
  double upper;
  DualPotential upper_potential;
  std::size_t iterations = 0;
  std::vector<TracePoint> trace;
};

namespace detail {

/// Exact potentials for chi(m, r) with g extended to the whole generator support.
inline DualPotential linearization_potential(const DiscreteMeasure& m, const DiscreteMeasure& r,
                                             const GeneratorSet& set)
{
  const auto pp = exact_potentials_single(m, r);
  std::vector<double> g(set.support().size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = c_transform(pp.xs, pp.f, set.support()[k]);
  return DualPotential::pinned(std::move(g));
}

} // namespace detail

/// Frank-Wolfe ascent of lambda -> chi(m, sum_v lambda_v r^(v)) over the simplex.
///
/// Starts at the best vertex. Each iterate yields exact potentials whose
/// dual objective is an upper bound, so every iterate carries a gap.
inline FrankWolfeResult primal_frank_wolfe(const DiscreteMeasure& m, const GeneratorSet& set,
                                           const SolverOptions& opts = {})
{
  opts.validate();
  if (set.mode() != HullMode::ConvexHull)
    detail::fail(ErrorCode::WrongMode, "Frank-Wolfe solves the convex hull problem only");

  const std::size_t nv = set.vertex_count();
  const auto start = chi_generators(m, set, true);
  std::vector<double> lambda(nv, 0.0);
  lambda[start.vertex] = 1.0;

  FrankWolfeResult out{lambda, start.value, set.vertex_measure(start.vertex),
                       std::numeric_limits<double>::infinity(), DualPotential::zeros(set.free_dim()), 0, {}};

  for (std::size_t it = 0; it < opts.fw_max_iters; ++it) {
    const DiscreteMeasure mix = set.mixture(lambda);
    const double value = chi_single(m, mix);
    if (value > out.value) {
      out.value = value;
      out.lambda = lambda;
      out.mixture = mix;
    }
    const auto g = detail::linearization_potential(m, mix, set);
    const double upper = dual_objective(m, set, g);
    if (upper < out.upper) {
      out.upper = upper;
      out.upper_potential = g;
    }
    out.iterations = it + 1;
    if (it % 100 == 0) out.trace.push_back({it, out.value});
    if (out.upper - out.value <= opts.tolerance_at(out.value)) break;

    const auto best = support_function(set, g);
    const double step = 2.0 / (static_cast<double>(it) + 2.0);
    for (double& l : lambda) l *= 1.0 - step;
    lambda[best.index] += step;
  }
  out.trace.push_back({out.iterations, out.value});
  return out;
}

struct GapReport
{
  double primal_lower;
  double dual_upper;
  double gap;
  std::vector<double> lambda;
  Coupling coupling;
  DualPotential dual_witness;
  std::size_t fw_iterations = 0;
  std::size_t dual_iterations = 0;
  SolveStatus status = SolveStatus::IterLimit;
};

/// Primal lower bound, dual upper bound and their gap for chi over R.
///
/// For a FiniteSet the primal side is the vertex maximum while the dual side
/// bounds the convex hull, so the gap closes only when the two coincide.
inline GapReport duality_gap_report(const DiscreteMeasure& m, const GeneratorSet& set, const SolverOptions& opts = {})
{
  opts.validate();
  std::vector<double> lambda(set.vertex_count(), 0.0);
  double primal;
  std::optional<DiscreteMeasure> target;
  std::optional<DualPotential> warm;
  double warm_value = std::numeric_limits<double>::infinity();
  std::size_t fw_iters = 0;

  if (set.mode() == HullMode::ConvexHull) {
    auto fw = primal_frank_wolfe(m, set, opts);
    primal = fw.value;
    lambda = fw.lambda;
    target = fw.mixture;
    warm = fw.upper_potential;
    warm_value = fw.upper;
    fw_iters = fw.iterations;
  } else {
    const auto best = chi_generators(m, set);
    primal = best.value;
    lambda[best.vertex] = 1.0;
    target = set.vertex_measure(best.vertex);
    warm = detail::linearization_potential(m, *target, set);
    warm_value = dual_objective(m, set, *warm);
  }

  DualPotential witness = *warm;
  double upper = warm_value;
  std::size_t dual_iters = 0;
  if (upper - primal > opts.tolerance_at(primal)) {
    auto sol = solve_dual_subgradient(m, set, opts, primal, warm);
    dual_iters = sol.iterations;
    if (sol.value < upper) {
      upper = sol.value;
      witness = sol.g;
    }
  }
  const auto refined = double_conjugate_refine(m, set, witness);
  const double refined_value = dual_objective(m, set, refined);
  if (refined_value <= upper) {
    upper = refined_value;
    witness = refined;
  }

  GapReport rep{primal, upper, upper - primal, lambda, comonotone_coupling(m, *target), witness, fw_iters, dual_iters,
                SolveStatus::IterLimit};
  if (rep.gap <= opts.tolerance_at(primal)) rep.status = SolveStatus::Converged;
  return rep;
}

} // namespace licorm

#endif // LICORM_DUALSOLVER_HPP
