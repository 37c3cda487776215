// Evaluates a few risk measures on a small sample and certifies a hull value
// through the primal/dual pair.
#include <cstdio>
#include <vector>

#include "licorm/licorm.hpp"

int main()
{
  using namespace licorm;
  const std::vector<double> losses{1.0, 2.0, 3.0, 4.0};
  const auto m = from_samples(losses);

  std::printf("E[X]              = %.6f\n", expectation(m));
  std::printf("CV@R_0.5 (tail)   = %.6f\n", cvar(m, 0.5));
  std::printf("CV@R_0.5 (OT)     = %.6f\n", chi_single(m, cvar_target_set(0.5).vertex_measure(0)));

  const auto mix = kusuoka_to_measure({{0.0, 0.5}, {0.5, 0.5}});
  std::printf("mixture via r_mu  = %.6f\n", chi_single(m, mix.image_measure));

  const auto hm = higher_moment(from_samples(std::vector<double>{0.0, 1.0}), 2.0, 1.2);
  std::printf("rho_{2,1.2}({0,1}) = %.6f at t = %.6f\n", hm.value, hm.t_star);

  const auto hull = GeneratorSet::create({0.0, 1.0, 2.0}, {{0.0, 1.0, 0.0}, {0.5, 0.0, 0.5}}, HullMode::ConvexHull);
  const auto rep = duality_gap_report(m, hull);
  std::printf("hull: primal %.9f  dual %.9f  gap %.2e\n", rep.primal_lower, rep.dual_upper, rep.gap);
  return 0;
}
