#pragma once

#include <cstdint>
#include <optional>

#include "aerostat/constitutive.hpp"
#include "aerostat/material.hpp"
#include "aerostat/types.hpp"

namespace aerostat {

/// Hydrostatic load specification: -P(z) = b z + p0.
struct LoadSpec {
  double buoyancy = 0.0;           // b [N/m^3]
  double constant_pressure = 0.0;  // p0 [Pa]
  std::optional<double> target_volume;  // omega_0 [m^3], closed system only
  // design pair for the Archimedes consistency check b*omega0 = b_d*omega0_d
  std::optional<double> design_buoyancy;
  std::optional<double> design_volume;

  void validate() const {
    if (!(buoyancy > 0.0)) throw ConfigError("loads.buoyancy must be > 0");
    if (target_volume && !(*target_volume > 0.0))
      throw ConfigError("loads.target_volume must be > 0");
  }

  /// Relative mismatch of b*omega0 vs b_d*omega0_d; nullopt when not checkable.
  std::optional<double> archimedes_mismatch() const {
    if (!target_volume || !design_buoyancy || !design_volume) return std::nullopt;
    const double lhs = buoyancy * (*target_volume);
    const double rhs = (*design_buoyancy) * (*design_volume);
    return std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
  }
};

/// adj2 of a 3x2 matrix: cross product of its columns (x_{,1} x x_{,2}).
inline Vec3 adj2(const Mat32& F) {
  return Vec3(F.col(0)).cross(Vec3(F.col(1)));
}

/// Signed volume contribution of one outward-wound facet, (1/6) x0.(x1 x x2).
/// Exact divergence-theorem value for a flat triangle; cut faces through the
/// origin and the z=0 base plane contribute zero flux, so fundamental-domain
/// sums scale to the closed balloon by the symmetry multiplicity.
double facet_volume_contribution(const Vec3& x0, const Vec3& x1, const Vec3& x2);

/// Exact hydrostatic pressure potential of one facet,
///   -(k.a) * avg3(b z^2/2 + p0 z),
/// a = (x1-x0)x(x2-x0)/2 and avg3 the edge-midpoint rule (exact for the
/// quadratic integrand).
double facet_pressure_potential(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                                double b, double p0);

/// Analytic facet gradients, accumulated into g0..g2 (scaled by `weight`).
void accumulate_volume_gradient(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                                double weight, Vec3* g0, Vec3* g1, Vec3* g2);
void accumulate_pressure_gradient(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                                  double b, double p0, double weight, Vec3* g0,
                                  Vec3* g1, Vec3* g2);

/// Sampled sweep of the adj2 Lipschitz bound |adj2 A - adj2 B| <= 3(|A|+|B|)|A-B|
/// and the pointwise bound |adj2 F . k| <= |F|^2.
BoundsReport verify_adj2_bounds(long samples, std::uint64_t seed = 20240802u);

/// Sampled sweep of the hydrostatic density bounds
///   -(b R^2/2 + |p0| R)|F|^2 <= g_P <= (b R^2/2 + |p0| R)|F|^2  for |x| <= R
/// and of the coercivity chain
///   tau nu1/8 |F|^4 <= W* + f_P + rho1 <= tau theta1/8 |F|^4 + tau(1+nu)/4
///                                        + rho1 + rho2
/// with rho1 = (tau(1+nu) + 2bR^2 + 4|p0|R)^2 / (8 tau (nu - nu1)) and
/// rho2 = (bR^2 + 2|p0|R)^2 / (2 tau (theta1 - 1)).
BoundsReport verify_load_bounds(const LoadSpec& spec, const MaterialProps& mat,
                                double R_bound, long samples, double nu1 = -1.0,
                                double theta1 = 2.0,
                                std::uint64_t seed = 20240803u);

}  // namespace aerostat
