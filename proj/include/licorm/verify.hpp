#ifndef LICORM_VERIFY_HPP
#define LICORM_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "licorm/error.hpp"
#include "licorm/measures.hpp"
#include "licorm/random.hpp"
#include "licorm/riskmeasures.hpp"
#include "licorm/transport.hpp"

namespace licorm {

// ---------------------------------------------------------------------------
// Seeded instance generators
// ---------------------------------------------------------------------------

/// n values in [-10, 10]; roughly a third of the draws are rounded to a
/// coarse grid so that ties (merged atoms) occur.
inline std::vector<double> random_values(SplitMix64& rng, std::size_t n)
{
  std::vector<double> xs(n);
  const int shape = static_cast<int>(rng.index(3));
  for (double& x : xs) {
    double v = rng.uniform(-10.0, 10.0);
    if (shape == 1) v = std::round(v * 2.0) / 2.0;
    if (shape == 2) v = 10.0 * std::tanh(0.3 * (rng.uniform() + rng.uniform() + rng.uniform() - 1.5) * 6.0);
    x = v;
  }
  return xs;
}

/// Empirical measure with 1..max_n atoms, weighted half of the time.
inline DiscreteMeasure random_measure(SplitMix64& rng, std::size_t max_n)
{
  const std::size_t n = rng.between(1, max_n);
  const auto xs = random_values(rng, n);
  if (rng.uniform() < 0.5) return from_samples(xs);
  std::vector<double> ws(n);
  for (double& w : ws) w = rng.uniform(0.05, 1.0);
  return from_samples(xs, ws);
}

/// Paired equal-weight sample vectors of a common random length.
inline std::vector<std::vector<double>> random_samples(std::uint64_t seed, std::size_t count, std::size_t max_len)
{
  SplitMix64 rng(seed);
  const std::size_t len = rng.between(1, max_len);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_values(rng, len));
  return out;
}

/// Generator set with K + 1 support points and V unit-mean vertices.
///
/// Each vertex is an exponential (flat Dirichlet) draw mixed with the
/// extreme support point on the opposite side of 1 so that its mean is
/// exactly one; every support point therefore carries mass in every vertex.
inline GeneratorSet random_generator_set(SplitMix64& rng, std::size_t K, std::size_t V, HullMode mode)
{
  std::vector<double> ys;
  ys.push_back(rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 0.8));
  for (std::size_t k = 1; k <= K; ++k) ys.push_back(ys.back() + rng.uniform(0.1, 1.5));
  if (K == 0) {
    ys[0] = 1.0;
    return GeneratorSet::create(ys, std::vector<std::vector<double>>(V, {1.0}), mode);
  }
  if (ys.back() <= 1.0) ys.back() = 1.0 + rng.uniform(0.1, 2.0);
  if (ys.front() >= 1.0) ys.front() = 0.0;

  std::vector<std::vector<double>> vertices;
  for (std::size_t v = 0; v < V; ++v) {
    std::vector<double> w(K + 1);
    double total = 0.0;
    for (double& x : w) {
      x = -std::log(1.0 - rng.uniform());
      total += x;
    }
    double mean = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
      w[k] /= total;
      mean += w[k] * ys[k];
    }
    const std::size_t anchor = mean > 1.0 ? 0 : K;
    const double alpha = (ys[anchor] - 1.0) / (ys[anchor] - mean);
    for (double& x : w) x *= alpha;
    w[anchor] += 1.0 - alpha;
    vertices.push_back(std::move(w));
  }
  return GeneratorSet::create(std::move(ys), std::move(vertices), mode);
}

/// Mixture of 1..max_atoms CV@R levels in [0, 0.99).
inline std::vector<MixtureAtom> random_mixture(SplitMix64& rng, std::size_t max_atoms)
{
  const std::size_t n = rng.between(1, max_atoms);
  std::vector<MixtureAtom> atoms(n);
  double total = 0.0;
  for (auto& a : atoms) {
    a.beta = rng.uniform() < 0.2 ? 0.0 : std::floor(rng.uniform(0.0, 0.99) * 1000.0) / 1000.0;
    a.weight = rng.uniform(0.05, 1.0);
    total += a.weight;
  }
  for (auto& a : atoms) a.weight /= total;
  CompensatedSum s;
  for (std::size_t i = 0; i + 1 < n; ++i) s += atoms[i].weight;
  atoms.back().weight = 1.0 - s.value();
  return atoms;
}

// ---------------------------------------------------------------------------
// Axiom and bound harness
// ---------------------------------------------------------------------------

struct PropertyCheck
{
  std::string name;
  double max_violation = 0.0; ///< >= 0; zero when the inequality held everywhere
  std::string witness;        ///< instance producing the largest violation
  std::size_t evaluated = 0;
};

struct PropertyReport
{
  std::vector<PropertyCheck> checks;
  double tol = 0.0;
  /// Weaker distribution-only variant of monotonicity, reported separately.
  std::vector<PropertyCheck> supplementary;

  bool passed() const noexcept
  {
    return std::all_of(checks.begin(), checks.end(), [&](const auto& c) { return c.max_violation <= tol; });
  }
};

using AxiomReport = PropertyReport;

namespace detail {

inline void record(PropertyCheck& check, double violation, std::size_t instance, const std::string& extra = {})
{
  ++check.evaluated;
  if (violation > check.max_violation || (std::isnan(violation) && !std::isnan(check.max_violation))) {
    check.max_violation = violation;
    check.witness = "pair " + std::to_string(instance) + extra;
  }
}

inline std::string param(const char* name, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, ", %s=%.17g", name, v);
  return buf;
}

inline void check_lengths(std::span<const std::vector<double>> samples)
{
  require(!samples.empty(), ErrorCode::EmptyInput, "no sample vectors");
  for (const auto& s : samples) {
    require(!s.empty(), ErrorCode::EmptyInput, "sample vector is empty");
    require(s.size() == samples.front().size(), ErrorCode::LengthMismatch, "paired sample vectors differ in length");
  }
}

} // namespace detail

/// Evaluates rho on an equal-weight sample vector.
inline double rho_of(const RiskSpec& spec, std::span<const double> sample, const SolverOptions& opts = {})
{
  return rho(spec, from_samples(sample), opts);
}

/// Translation invariance, positive homogeneity, monotonicity and convexity
/// on paired sample vectors: sample i is paired with sample i + 1 (cyclic).
/// Pointwise operations act coordinatewise on the shared sample space.
inline AxiomReport check_axioms(const RiskSpec& spec, std::span<const std::vector<double>> samples, double tol,
                                std::uint64_t seed = 0, const SolverOptions& opts = {})
{
  validate(spec);
  detail::check_lengths(samples);
  SplitMix64 rng(seed);
  AxiomReport rep;
  rep.tol = tol;
  rep.checks = {{"translation_invariance"}, {"positive_homogeneity"}, {"monotonicity"}, {"convexity"}};
  rep.supplementary = {{"monotonicity_first_order_dominance"}};

  const std::size_t len = samples.front().size();
  std::vector<double> buf(len);
  std::vector<double> lo(len);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x1 = samples[i];
    const auto& x2 = samples[(i + 1) % samples.size()];
    const double r1 = rho_of(spec, x1, opts);
    const double r2 = rho_of(spec, x2, opts);

    const double alpha = rng.uniform(-10.0, 10.0);
    for (std::size_t k = 0; k < len; ++k) buf[k] = x1[k] + alpha;
    detail::record(rep.checks[0], std::abs(rho_of(spec, buf, opts) - r1 - alpha), i, detail::param("alpha", alpha));

    const double delta = rng.uniform(0.0, 10.0);
    for (std::size_t k = 0; k < len; ++k) buf[k] = delta * x1[k];
    detail::record(rep.checks[1], std::abs(rho_of(spec, buf, opts) - delta * r1), i, detail::param("delta", delta));

    for (std::size_t k = 0; k < len; ++k) lo[k] = std::min(x1[k], x2[k]);
    const double rlo = rho_of(spec, lo, opts);
    detail::record(rep.checks[2], std::max(0.0, rlo - r2), i);

    const double theta = rng.uniform();
    for (std::size_t k = 0; k < len; ++k) buf[k] = (1.0 - theta) * x1[k] + theta * x2[k];
    detail::record(rep.checks[3], std::max(0.0, rho_of(spec, buf, opts) - (1.0 - theta) * r1 - theta * r2), i,
                   detail::param("theta", theta));

    // First-order dominance without pointwise dominance: shuffle the dominating vector.
    buf = x2;
    for (std::size_t k = len; k > 1; --k) std::swap(buf[k - 1], buf[rng.index(k)]);
    detail::record(rep.supplementary[0], std::max(0.0, rlo - rho_of(spec, buf, opts)), i);
  }
  return rep;
}

/// Moment order p and Lipschitz constant L_R used by the bound checks.
struct BoundConstants
{
  MomentOrder p;
  double lipschitz;
};

inline BoundConstants bound_constants(const RiskSpec& spec)
{
  return std::visit(
      [](const auto& s) -> BoundConstants {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HigherMomentSpec>) {
          return {MomentOrder::finite(s.p), s.c};
        } else if constexpr (std::is_same_v<T, ExplicitSpec>) {
          return {s.p, lipschitz_constant(s.set, s.p.conjugate())};
        } else {
          const auto set = *target_set(RiskSpec{s});
          return {MomentOrder::finite(1.0), lipschitz_constant(set, MomentOrder::infinity())};
        }
      },
      spec);
}

struct BoundsReport : PropertyReport
{
  BoundConstants constants;
  std::vector<double> min_slack; ///< per check: smallest bound - lhs observed
};

/// Aversity rho >= E, Lipschitz continuity in L^p with constant L_R, and the
/// elementary bound |rho| <= M_p * L_R, on paired sample vectors.
inline BoundsReport check_bounds(const RiskSpec& spec, std::span<const std::vector<double>> samples, double tol,
                                 const SolverOptions& opts = {})
{
  validate(spec);
  detail::check_lengths(samples);
  BoundsReport rep{PropertyReport{{{"aversity"}, {"lipschitz"}, {"elementary_bound"}}, tol, {}},
                   bound_constants(spec),
                   std::vector<double>(3, std::numeric_limits<double>::infinity())};
  const std::size_t len = samples.front().size();
  std::vector<double> diff(len);
  auto update = [&](std::size_t c, double lhs, double bound, std::size_t i) {
    detail::record(rep.checks[c], std::max(0.0, lhs - bound), i);
    rep.min_slack[c] = std::min(rep.min_slack[c], bound - lhs);
  };

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x1 = samples[i];
    const auto& x2 = samples[(i + 1) % samples.size()];
    const auto m1 = from_samples(x1);
    const auto m2 = from_samples(x2);
    const double r1 = rho(spec, m1, opts);
    const double r2 = rho(spec, m2, opts);

    update(0, expectation(m1), r1, i);
    for (std::size_t k = 0; k < len; ++k) diff[k] = x2[k] - x1[k];
    const double dist = moment_p(from_samples(diff), rep.constants.p);
    update(1, std::abs(r2 - r1), rep.constants.lipschitz * dist, i);
    update(2, std::abs(r1), moment_p(m1, rep.constants.p) * rep.constants.lipschitz, i);
  }
  return rep;
}

} // namespace licorm

#endif // LICORM_VERIFY_HPP
