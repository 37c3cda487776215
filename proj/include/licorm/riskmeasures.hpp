#ifndef LICORM_RISKMEASURES_HPP
#define LICORM_RISKMEASURES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "licorm/dualsolver.hpp"
#include "licorm/error.hpp"
#include "licorm/measures.hpp"
#include "licorm/numeric.hpp"
#include "licorm/transport.hpp"

namespace licorm {

/// Largest admissible CV@R level inside a Kusuoka mixture; keeps 1/(1-beta) bounded.
inline constexpr double kMaxMixtureBeta = 1.0 - 1e-9;

struct CvarSpec
{
  double beta;
};

struct HigherMomentSpec
{
  double p;
  double c;
};

struct MixtureAtom
{
  double beta;
  double weight;
};

struct KusuokaSpec
{
  std::vector<MixtureAtom> atoms;
};

struct ExplicitSpec
{
  GeneratorSet set;
  MomentOrder p = MomentOrder::finite(1.0);
};

using RiskSpec = std::variant<CvarSpec, HigherMomentSpec, KusuokaSpec, ExplicitSpec>;

namespace detail {

inline void check_beta(double beta)
{
  if (!(beta >= 0.0 && beta < 1.0)) fail(ErrorCode::OutOfRange, "beta out of range");
}

inline void check_higher_moment(double p, double c)
{
  if (!(std::isfinite(p) && p > 1.0)) fail(ErrorCode::InvalidParams, "higher moment order p must exceed 1");
  if (!(std::isfinite(c) && c > 1.0)) fail(ErrorCode::InvalidParams, "higher moment constant c must exceed 1");
}

} // namespace detail

/// CV@R_beta as the tail average of the upper 1 - beta mass, splitting the
/// straddling atom proportionally.
inline double cvar(const DiscreteMeasure& m, double beta)
{
  detail::check_beta(beta);
  const double tail = 1.0 - beta;
  const auto& atoms = m.atoms();
  CompensatedSum acc;
  double remaining = tail;
  for (auto it = atoms.rbegin(); it != atoms.rend() && remaining > 0.0; ++it) {
    const double take = std::min(it->weight, remaining);
    acc += (take / tail) * it->position;
    remaining -= take;
  }
  // Rounding can leave a sliver of tail mass unassigned; it sits on the lowest atom reached.
  if (remaining > 0.0) acc += (remaining / tail) * atoms.front().position;
  return acc.value();
}

/// Singleton target set {beta delta_0 + (1 - beta) delta_{1/(1-beta)}}; {delta_1} for beta = 0.
inline GeneratorSet cvar_target_set(double beta)
{
  detail::check_beta(beta);
  if (beta == 0.0) return GeneratorSet::create({1.0}, {{1.0}});
  return GeneratorSet::create({0.0, 1.0 / (1.0 - beta)}, {{beta, 1.0 - beta}});
}

/// Objective t + c E[(X - t)_+^p]^(1/p) of the higher order dual risk measure.
inline double higher_moment_objective(const DiscreteMeasure& m, double p, double c, double t)
{
  CompensatedSum s;
  for (const Atom& a : m.atoms())
    if (a.position > t) s += a.weight * std::pow(a.position - t, p);
  return t + c * std::pow(s.value(), 1.0 / p);
}

struct HigherMomentValue
{
  double value;
  double t_star;
};

namespace detail {

/// Derivative of the higher-moment objective for t strictly below the support.
inline double higher_moment_slope_below(const DiscreteMeasure& m, double p, double c, double t)
{
  CompensatedSum lower;
  CompensatedSum upper;
  for (const Atom& a : m.atoms()) {
    const double d = a.position - t;
    lower += a.weight * std::pow(d, p - 1.0);
    upper += a.weight * std::pow(d, p);
  }
  return 1.0 - c * lower.value() / std::pow(upper.value(), (p - 1.0) / p);
}

} // namespace detail

/// inf_t { t + c E[(X - t)_+^p]^(1/p) } by golden-section search.
///
/// The objective is convex and increasing beyond the largest atom. The left
/// end of the bracket starts one support range below the smallest atom and
/// moves further left while the objective still increases there. Support
/// points are also tried since kinks sit there.
inline HigherMomentValue higher_moment(const DiscreteMeasure& m, double p, double c)
{
  detail::check_higher_moment(p, c);
  const double span = m.range() > 0.0 ? m.range() : std::max(1.0, std::abs(m.min()));
  double hi = m.max();
  double lo = m.min() - span;
  while (detail::higher_moment_slope_below(m, p, c, lo) > 0.0) lo = m.min() - 2.0 * (m.min() - lo);

  auto h = [&](double t) { return higher_moment_objective(m, p, c, t); };
  const double tol = 1e-12 * (1.0 + (hi - lo));
  constexpr double invphi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = h(x1);
  double f2 = h(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = h(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = h(x2);
    }
    if (x1 >= x2) break;
  }

  HigherMomentValue best{h(0.5 * (a + b)), 0.5 * (a + b)};
  auto consider = [&](double t) {
    const double v = h(t);
    if (v < best.value) best = {v, t};
  };
  consider(x1);
  consider(x2);
  for (const Atom& at : m.atoms()) consider(at.position);
  return best;
}

struct HigherMomentCertificate
{
  double t_bar;
  double u_bar;
  double dual_value;
};

/// Dual pair (t, u) for the higher-moment measure, with g_{t,u}(y) = t y + u y^q
/// and conjugate g*_{t,u}(x) = (1/p) (u q)^{-(p-1)} (x - t)_+^p.
inline HigherMomentCertificate higher_moment_dual_cert(const DiscreteMeasure& m, double p, double c)
{
  const auto primal = higher_moment(m, p, c);
  const double q = p / (p - 1.0);
  const double t = primal.t_star;
  CompensatedSum tail;
  for (const Atom& at : m.atoms())
    if (at.position > t) tail += at.weight * std::pow(at.position - t, p);
  const double a = tail.value();
  if (a == 0.0) return {t, 0.0, t};

  const double u = std::pow(a, 1.0 / p) / (q * std::pow(c, q - 1.0));
  const double scale = std::pow(u * q, -(p - 1.0)) / p;
  CompensatedSum dual;
  for (const Atom& at : m.atoms())
    if (at.position > t) dual += at.weight * scale * std::pow(at.position - t, p);
  dual += t;
  dual += u * std::pow(c, q);
  return {t, u, dual.value()};
}

struct PsiBreak
{
  double t;
  double value;
};

/// psi_mu as a right-continuous step function and its image r_mu of Lebesgue on [0, 1].
struct KusuokaImage
{
  std::vector<PsiBreak> psi_breaks;
  DiscreteMeasure image_measure;

  /// psi_mu(t) for t in [0, 1].
  double psi(double t) const noexcept
  {
    double v = 0.0;
    for (const auto& b : psi_breaks)
      if (b.t <= t) v = b.value;
    return v;
  }
};

/// Sorts and merges a mixture of CV@R levels, validating ranges.
inline std::vector<MixtureAtom> normalize_mixture(std::vector<MixtureAtom> mixture)
{
  using detail::require;
  require(!mixture.empty(), ErrorCode::InvalidMixture, "mixture is empty");
  CompensatedSum total;
  for (const auto& a : mixture) {
    require(std::isfinite(a.beta) && std::isfinite(a.weight), ErrorCode::InvalidMixture,
            "mixture entries must be finite");
    require(a.beta >= 0.0 && a.beta <= kMaxMixtureBeta, ErrorCode::InvalidMixture,
            "mixture level beta must lie in [0, 1 - 1e-9]");
    require(a.weight > 0.0, ErrorCode::InvalidMixture, "mixture weight must be positive");
    total += a.weight;
  }
  require(std::abs(total.value() - 1.0) <= 1e-12, ErrorCode::InvalidMixture, "mixture weights must sum to one");
  std::stable_sort(mixture.begin(), mixture.end(),
                   [](const MixtureAtom& a, const MixtureAtom& b) { return a.beta < b.beta; });
  std::vector<MixtureAtom> merged;
  for (const auto& a : mixture) {
    if (!merged.empty() && merged.back().beta == a.beta)
      merged.back().weight += a.weight;
    else
      merged.push_back(a);
  }
  return merged;
}

inline KusuokaImage kusuoka_to_measure(std::vector<MixtureAtom> mixture)
{
  const auto atoms = normalize_mixture(std::move(mixture));
  std::vector<PsiBreak> breaks;
  std::vector<Atom> image;
  if (atoms.front().beta > 0.0) {
    breaks.push_back({0.0, 0.0});
    image.push_back({0.0, atoms.front().beta});
  }
  CompensatedSum psi;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    psi += atoms[j].weight / (1.0 - atoms[j].beta);
    const double next = j + 1 < atoms.size() ? atoms[j + 1].beta : 1.0;
    breaks.push_back({atoms[j].beta, psi.value()});
    image.push_back({psi.value(), next - atoms[j].beta});
  }
  return {std::move(breaks), DiscreteMeasure::from_atoms(std::move(image))};
}

/// Validates the parameter ranges of a spec.
inline void validate(const RiskSpec& spec)
{
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CvarSpec>)
          detail::check_beta(s.beta);
        else if constexpr (std::is_same_v<T, HigherMomentSpec>)
          detail::check_higher_moment(s.p, s.c);
        else if constexpr (std::is_same_v<T, KusuokaSpec>)
          normalize_mixture(s.atoms);
      },
      spec);
}

/// rho_R(X) = chi_R(law of X).
///
/// A ConvexHull explicit set returns the primal value certified by the gap
/// report, i.e. the value attained by an explicit mixture of the vertices.
inline double rho(const RiskSpec& spec, const DiscreteMeasure& m, const SolverOptions& opts = {})
{
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CvarSpec>) {
          return cvar(m, s.beta);
        } else if constexpr (std::is_same_v<T, HigherMomentSpec>) {
          return higher_moment(m, s.p, s.c).value;
        } else if constexpr (std::is_same_v<T, KusuokaSpec>) {
          return chi_single(m, kusuoka_to_measure(s.atoms).image_measure);
        } else {
          if (s.set.mode() == HullMode::FiniteSet) return chi_generators(m, s.set).value;
          return duality_gap_report(m, s.set, opts).primal_lower;
        }
      },
      spec);
}

/// Target set realizing a spec as a transport problem, when it has one.
inline std::optional<GeneratorSet> target_set(const RiskSpec& spec)
{
  return std::visit(
      [](const auto& s) -> std::optional<GeneratorSet> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CvarSpec>)
          return cvar_target_set(s.beta);
        else if constexpr (std::is_same_v<T, KusuokaSpec>)
          return GeneratorSet::singleton(kusuoka_to_measure(s.atoms).image_measure);
        else if constexpr (std::is_same_v<T, ExplicitSpec>)
          return s.set;
        else
          return std::nullopt;
      },
      spec);
}

} // namespace licorm

#endif // LICORM_RISKMEASURES_HPP
