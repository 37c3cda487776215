#ifndef LICORM_MEASURES_HPP
#define LICORM_MEASURES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "licorm/error.hpp"
#include "licorm/numeric.hpp"

namespace licorm {

struct Atom
{
  double position;
  double weight;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// How nearly-equal positions are treated when atoms are merged.
enum class AtomMerge {
  Exact, ///< only bitwise-equal positions merge
  Snap,  ///< positions within 1e-12 * max(1, |x|) of the previous atom merge
};

inline constexpr double kNormalizationTolerance = 1e-9;
inline constexpr double kSnapTolerance = 1e-12;
inline constexpr double kBreakpointTolerance = 1e-15;

/// Right-inverse of a CDF as a step function on (0, 1].
///
/// Cell i covers (breakpoints[i-1], breakpoints[i]] with breakpoints[-1] = 0
/// and carries values[i].
struct QuantilePartition
{
  std::vector<double> breakpoints;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double lower(std::size_t i) const noexcept { return i == 0 ? 0.0 : breakpoints[i - 1]; }
};

/// Finitely supported probability measure on the real line.
///
/// Atoms are sorted by position, positions are distinct and finite, and
/// weights are strictly positive and sum to one.
class DiscreteMeasure
{
public:
  /// Builds a measure from atoms whose weights already (nearly) sum to one.
  static DiscreteMeasure from_atoms(std::vector<Atom> atoms, AtomMerge merge = AtomMerge::Exact)
  {
    detail::require(!atoms.empty(), ErrorCode::EmptyInput, "measure needs at least one atom");
    CompensatedSum total;
    for (const Atom& a : atoms) {
      detail::require(std::isfinite(a.position) && std::isfinite(a.weight), ErrorCode::NonFiniteValue,
                      "atom position and weight must be finite");
      detail::require(a.weight >= 0.0, ErrorCode::NegativeWeight, "atom weight must be nonnegative");
      total += a.weight;
    }
    detail::require(std::abs(total.value() - 1.0) <= kNormalizationTolerance, ErrorCode::NotNormalized,
                    "atom weights must sum to one");
    return DiscreteMeasure(std::move(atoms), total.value(), merge);
  }

  static DiscreteMeasure dirac(double position) { return from_atoms({{position, 1.0}}); }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double min() const noexcept { return atoms_.front().position; }
  double max() const noexcept { return atoms_.back().position; }
  double range() const noexcept { return max() - min(); }

  const QuantilePartition& quantiles() const noexcept { return quantiles_; }

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) { return a.atoms_ == b.atoms_; }

private:
  DiscreteMeasure(std::vector<Atom> atoms, double total, AtomMerge merge)
  {
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const Atom& a, const Atom& b) { return a.position < b.position; });
    atoms_.reserve(atoms.size());
    for (const Atom& a : atoms) {
      if (a.weight == 0.0) continue;
      if (!atoms_.empty()) {
        Atom& last = atoms_.back();
        const bool same =
            merge == AtomMerge::Exact
                ? a.position == last.position
                : a.position - last.position <= kSnapTolerance * std::max(1.0, std::abs(last.position));
        if (same) {
          last.weight += a.weight;
          continue;
        }
      }
      atoms_.push_back(a);
    }
    detail::require(!atoms_.empty(), ErrorCode::ZeroTotalWeight, "all atom weights are zero");
    for (Atom& a : atoms_) a.weight /= total;

    quantiles_.breakpoints.reserve(atoms_.size());
    quantiles_.values.reserve(atoms_.size());
    CompensatedSum cum;
    for (const Atom& a : atoms_) {
      cum += a.weight;
      quantiles_.breakpoints.push_back(std::min(cum.value(), 1.0));
      quantiles_.values.push_back(a.position);
    }
    quantiles_.breakpoints.back() = 1.0;
  }

  std::vector<Atom> atoms_;
  QuantilePartition quantiles_;
};

/// Empirical distribution of a sample, optionally weighted.
///
/// Weights are arbitrary nonnegative reals; they are normalized here.
inline DiscreteMeasure from_samples(std::span<const double> values,
                                    std::optional<std::span<const double>> weights = std::nullopt,
                                    AtomMerge merge = AtomMerge::Exact)
{
  detail::require(!values.empty(), ErrorCode::EmptyInput, "sample is empty");
  if (weights)
    detail::require(weights->size() == values.size(), ErrorCode::LengthMismatch,
                    "weights and values differ in length");

  std::vector<Atom> atoms;
  atoms.reserve(values.size());
  CompensatedSum total;
  for (std::size_t i = 0; i < values.size(); ++i) {
    detail::require(std::isfinite(values[i]), ErrorCode::NonFiniteValue, "sample value is not finite");
    const double w = weights ? (*weights)[i] : 1.0;
    detail::require(std::isfinite(w), ErrorCode::NonFiniteValue, "sample weight is not finite");
    detail::require(w >= 0.0, ErrorCode::NegativeWeight, "sample weight is negative");
    atoms.push_back({values[i], w});
    total += w;
  }
  detail::require(total.value() > 0.0, ErrorCode::ZeroTotalWeight, "sample weights are all zero");
  for (Atom& a : atoms) a.weight /= total.value();
  return DiscreteMeasure::from_atoms(std::move(atoms), merge);
}

/// inf { x : CDF(x) >= t } for t in (0, 1].
inline double quantile(const DiscreteMeasure& m, double t)
{
  detail::require(t > 0.0 && t <= 1.0, ErrorCode::OutOfRange, "quantile level must lie in (0, 1]");
  const auto& q = m.quantiles();
  const auto it = std::lower_bound(q.breakpoints.begin(), q.breakpoints.end(), t);
  return q.values[static_cast<std::size_t>(it - q.breakpoints.begin())];
}

inline double expectation(const DiscreteMeasure& m) noexcept
{
  CompensatedSum s;
  for (const Atom& a : m.atoms()) s += a.weight * a.position;
  return s.value();
}

inline double moment_p(const DiscreteMeasure& m, MomentOrder order)
{
  if (order.is_infinite()) return std::max(std::abs(m.min()), std::abs(m.max()));
  const double p = order.value();
  CompensatedSum s;
  for (const Atom& a : m.atoms()) s += a.weight * std::pow(std::abs(a.position), p);
  return p == 1.0 ? s.value() : std::pow(s.value(), 1.0 / p);
}

/// Visits the cells of the common refinement of two quantile partitions.
///
/// `fn(i, j, lo, hi)` receives the cell indices into `a` and `b` and the
/// cell bounds; breakpoints closer than 1e-15 are treated as simultaneous.
template <typename Fn>
void for_each_merged_cell(const QuantilePartition& a, const QuantilePartition& b, Fn&& fn)
{
  std::size_t i = 0;
  std::size_t j = 0;
  double prev = 0.0;
  while (i < a.size() && j < b.size()) {
    const double ba = a.breakpoints[i];
    const double bb = b.breakpoints[j];
    double next;
    std::size_t ci = i;
    std::size_t cj = j;
    if (std::abs(ba - bb) <= kBreakpointTolerance) {
      next = std::max(ba, bb);
      ++i;
      ++j;
    } else if (ba < bb) {
      next = ba;
      ++i;
    } else {
      next = bb;
      ++j;
    }
    if (next > prev) fn(ci, cj, prev, next);
    prev = std::max(prev, next);
  }
}

/// 1-D p-Wasserstein distance through the quantile representation.
inline double wasserstein_p(const DiscreteMeasure& m1, const DiscreteMeasure& m2, MomentOrder order)
{
  const auto& q1 = m1.quantiles();
  const auto& q2 = m2.quantiles();
  if (order.is_infinite()) {
    double worst = 0.0;
    for_each_merged_cell(q1, q2, [&](std::size_t i, std::size_t j, double, double) {
      worst = std::max(worst, std::abs(q1.values[i] - q2.values[j]));
    });
    return worst;
  }
  const double p = order.value();
  CompensatedSum s;
  for_each_merged_cell(q1, q2, [&](std::size_t i, std::size_t j, double lo, double hi) {
    s += (hi - lo) * std::pow(std::abs(q1.values[i] - q2.values[j]), p);
  });
  return p == 1.0 ? s.value() : std::pow(s.value(), 1.0 / p);
}

} // namespace licorm

#endif // LICORM_MEASURES_HPP
