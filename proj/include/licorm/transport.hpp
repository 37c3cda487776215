#ifndef LICORM_TRANSPORT_HPP
#define LICORM_TRANSPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "licorm/error.hpp"
#include "licorm/measures.hpp"
#include "licorm/numeric.hpp"

namespace licorm {

enum class HullMode {
  FiniteSet,  ///< the target set is exactly the listed vertices
  ConvexHull, ///< the target set is the convex hull of the vertices
};

inline constexpr double kSimplexTolerance = 1e-12;
inline constexpr double kUnitMeanTolerance = 1e-9;

/// Target set given by probability vectors over a common finite support
/// y_0 < ... < y_K in [0, inf), each with unit mean.
class GeneratorSet
{
public:
  static GeneratorSet create(std::vector<double> support, std::vector<std::vector<double>> vertices,
                             HullMode mode = HullMode::FiniteSet)
  {
    using detail::require;
    require(!support.empty(), ErrorCode::InvalidGeneratorSet, "generator support is empty");
    require(!vertices.empty(), ErrorCode::InvalidGeneratorSet, "generator set has no vertex");
    for (std::size_t k = 0; k < support.size(); ++k) {
      require(std::isfinite(support[k]), ErrorCode::NonFiniteValue, "generator support must be finite");
      require(support[k] >= 0.0, ErrorCode::InvalidGeneratorSet, "generator support must be nonnegative");
      if (k > 0)
        require(support[k] > support[k - 1], ErrorCode::InvalidGeneratorSet,
                "generator support must be strictly increasing");
    }
    for (const auto& v : vertices) {
      require(v.size() == support.size(), ErrorCode::InvalidGeneratorSet,
              "vertex length differs from support length");
      CompensatedSum mass;
      CompensatedSum mean;
      for (std::size_t k = 0; k < v.size(); ++k) {
        require(std::isfinite(v[k]), ErrorCode::NonFiniteValue, "vertex weight must be finite");
        require(v[k] >= 0.0, ErrorCode::InvalidGeneratorSet, "vertex weight must be nonnegative");
        mass += v[k];
        mean += v[k] * support[k];
      }
      require(std::abs(mass.value() - 1.0) <= kSimplexTolerance, ErrorCode::InvalidGeneratorSet,
              "vertex weights must sum to one");
      require(std::abs(mean.value() - 1.0) <= kUnitMeanTolerance, ErrorCode::InvalidGeneratorSet,
              "vertex must have unit mean");
    }
    return GeneratorSet(std::move(support), std::move(vertices), mode);
  }

  static GeneratorSet singleton(const DiscreteMeasure& r, HullMode mode = HullMode::FiniteSet)
  {
    std::vector<double> support;
    std::vector<double> weights;
    for (const Atom& a : r.atoms()) {
      support.push_back(a.position);
      weights.push_back(a.weight);
    }
    return create(std::move(support), {std::move(weights)}, mode);
  }

  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<std::vector<double>>& vertices() const noexcept { return vertices_; }
  const std::vector<double>& vertex(std::size_t v) const noexcept { return vertices_[v]; }
  const DiscreteMeasure& vertex_measure(std::size_t v) const noexcept { return measures_[v]; }
  HullMode mode() const noexcept { return mode_; }

  /// Number of free support points K (support has K + 1 entries).
  std::size_t free_dim() const noexcept { return support_.size() - 1; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }

  GeneratorSet with_mode(HullMode mode) const { return GeneratorSet(support_, vertices_, mode); }

  /// Measure with weights sum_v lambda_v r^(v) on the common support.
  DiscreteMeasure mixture(std::span<const double> lambda) const
  {
    std::vector<Atom> atoms;
    atoms.reserve(support_.size());
    for (std::size_t k = 0; k < support_.size(); ++k) {
      CompensatedSum w;
      for (std::size_t v = 0; v < vertices_.size(); ++v) w += lambda[v] * vertices_[v][k];
      if (w.value() >= 1e-15) atoms.push_back({support_[k], w.value()});
    }
    CompensatedSum total;
    for (const Atom& a : atoms) total += a.weight;
    for (Atom& a : atoms) a.weight /= total.value();
    return DiscreteMeasure::from_atoms(std::move(atoms));
  }

private:
  GeneratorSet(std::vector<double> support, std::vector<std::vector<double>> vertices, HullMode mode)
    : support_(std::move(support)), vertices_(std::move(vertices)), mode_(mode)
  {
    measures_.reserve(vertices_.size());
    for (const auto& v : vertices_) {
      std::vector<Atom> atoms;
      for (std::size_t k = 0; k < v.size(); ++k)
        if (v[k] > 0.0) atoms.push_back({support_[k], v[k]});
      measures_.push_back(DiscreteMeasure::from_atoms(std::move(atoms)));
    }
  }

  std::vector<double> support_;
  std::vector<std::vector<double>> vertices_;
  std::vector<DiscreteMeasure> measures_;
  HullMode mode_;
};

struct CouplingAtom
{
  double x;
  double y;
  double mass;
};

/// Finitely supported plan on the plane together with its two marginals.
class Coupling
{
public:
  Coupling(std::vector<CouplingAtom> atoms, DiscreteMeasure first, DiscreteMeasure second)
    : atoms_(std::move(atoms)), first_(std::move(first)), second_(std::move(second))
  {}

  const std::vector<CouplingAtom>& atoms() const noexcept { return atoms_; }
  const DiscreteMeasure& first() const noexcept { return first_; }
  const DiscreteMeasure& second() const noexcept { return second_; }

  /// Integral of x * y against the plan.
  double objective() const noexcept
  {
    CompensatedSum s;
    for (const auto& a : atoms_) s += a.x * a.y * a.mass;
    return s.value();
  }

private:
  std::vector<CouplingAtom> atoms_;
  DiscreteMeasure first_;
  DiscreteMeasure second_;
};

/// Monotone rearrangement plan (F_m^{-1}, F_r^{-1}) pushed from Lebesgue on (0, 1].
inline Coupling comonotone_coupling(const DiscreteMeasure& m, const DiscreteMeasure& r)
{
  const auto& qm = m.quantiles();
  const auto& qr = r.quantiles();
  std::vector<CouplingAtom> atoms;
  atoms.reserve(qm.size() + qr.size() - 1);
  for_each_merged_cell(qm, qr, [&](std::size_t i, std::size_t j, double lo, double hi) {
    atoms.push_back({qm.values[i], qr.values[j], hi - lo});
  });
  return Coupling(std::move(atoms), m, r);
}

/// Value of the transport problem with fixed second marginal r:
/// the integral over (0, 1] of F_m^{-1} F_r^{-1}.
inline double chi_single(const DiscreteMeasure& m, const DiscreteMeasure& r)
{
  const auto& qm = m.quantiles();
  const auto& qr = r.quantiles();
  CompensatedSum s;
  for_each_merged_cell(qm, qr, [&](std::size_t i, std::size_t j, double lo, double hi) {
    s += qm.values[i] * qr.values[j] * (hi - lo);
  });
  return s.value();
}

struct VertexValue
{
  double value;
  std::size_t vertex;
};

/// Maximum of chi_single over the listed vertices, lowest index on ties.
///
/// For a ConvexHull set this is only a lower bound of the hull value and
/// must be requested explicitly through `allow_lower_bound`.
inline VertexValue chi_generators(const DiscreteMeasure& m, const GeneratorSet& set,
                                  bool allow_lower_bound = false)
{
  if (set.mode() == HullMode::ConvexHull && !allow_lower_bound)
    detail::fail(ErrorCode::WrongMode,
                 "vertex maximum is only a lower bound on a convex hull; use the hull solver");
  VertexValue best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t v = 0; v < set.vertex_count(); ++v) {
    const double val = chi_single(m, set.vertex_measure(v));
    if (val > best.value) best = {val, v};
  }
  return best;
}

/// Pair of potentials (f on supp(m), g on a finite set of y values).
struct PotentialPair
{
  std::vector<double> xs;
  std::vector<double> f;
  std::vector<double> ys;
  std::vector<double> g;

  /// Integral of f against m plus integral of g against r, both measures
  /// supported inside xs and ys respectively.
  double value(const DiscreteMeasure& m, const DiscreteMeasure& r) const
  {
    CompensatedSum s;
    auto lookup = [](const std::vector<double>& pts, const std::vector<double>& vals, double at) {
      const auto it = std::lower_bound(pts.begin(), pts.end(), at);
      if (it == pts.end() || *it != at)
        detail::fail(ErrorCode::OutOfRange, "measure charges a point where the potential is undefined");
      return vals[static_cast<std::size_t>(it - pts.begin())];
    };
    for (const Atom& a : m.atoms()) s += a.weight * lookup(xs, f, a.position);
    for (const Atom& a : r.atoms()) s += a.weight * lookup(ys, g, a.position);
    return s.value();
  }

  /// max over the grid of x*y - f(x) - g(y); nonpositive iff feasible.
  double max_violation() const noexcept
  {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t k = 0; k < ys.size(); ++k) worst = std::max(worst, xs[i] * ys[k] - f[i] - g[k]);
    return worst;
  }
};

/// g(y) = max_i (x_i y - f_i): the smallest g keeping (f, g) feasible.
inline double c_transform(std::span<const double> xs, std::span<const double> f, double y) noexcept
{
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) best = std::max(best, xs[i] * y - f[i]);
  return best;
}

/// Complementary-slackness potentials for the single-target problem.
///
/// Potentials are propagated along the monotone staircase; a simultaneous
/// jump in both quantile functions starts a new block whose g value is the
/// tightest feasible one against every x assigned so far. g(y_0) = 0.
inline PotentialPair exact_potentials_single(const DiscreteMeasure& m, const DiscreteMeasure& r)
{
  const auto& qm = m.quantiles();
  const auto& qr = r.quantiles();
  PotentialPair pp;
  pp.xs = qm.values;
  pp.ys = qr.values;
  pp.f.assign(qm.size(), 0.0);
  pp.g.assign(qr.size(), 0.0);

  std::vector<bool> fset(qm.size(), false);
  std::vector<bool> gset(qr.size(), false);
  bool first = true;
  std::size_t pi = 0;
  std::size_t pj = 0;
  for_each_merged_cell(qm, qr, [&](std::size_t i, std::size_t j, double, double) {
    const double x = qm.values[i];
    const double y = qr.values[j];
    if (first) {
      pp.g[j] = 0.0;
      pp.f[i] = x * y;
      first = false;
    } else if (i == pi && j != pj) {
      pp.g[j] = x * y - pp.f[i];
    } else if (i != pi && j == pj) {
      pp.f[i] = x * y - pp.g[j];
    } else if (i != pi && j != pj) {
      pp.g[j] = c_transform(std::span(pp.xs).first(i), std::span(pp.f).first(i), y);
      pp.f[i] = x * y - pp.g[j];
    }
    pi = i;
    pj = j;
    fset[i] = true;
    gset[j] = true;
  });

  // Atoms lighter than the breakpoint tolerance can be skipped by the sweep.
  for (std::size_t i = 0; i < pp.f.size(); ++i) {
    if (fset[i]) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pp.g.size(); ++j)
      if (gset[j]) best = std::max(best, pp.xs[i] * pp.ys[j] - pp.g[j]);
    pp.f[i] = best;
  }
  for (std::size_t j = 0; j < pp.g.size(); ++j)
    if (!gset[j]) pp.g[j] = c_transform(pp.xs, pp.f, pp.ys[j]);
  return pp;
}

/// L_R: the largest q-th moment among the vertices. The q-th power moment
/// is linear in the weights, so this also bounds the convex hull.
inline double lipschitz_constant(const GeneratorSet& set, MomentOrder q)
{
  double best = 0.0;
  for (std::size_t v = 0; v < set.vertex_count(); ++v)
    best = std::max(best, moment_p(set.vertex_measure(v), q));
  return best;
}

} // namespace licorm

#endif // LICORM_TRANSPORT_HPP
