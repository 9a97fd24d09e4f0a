#pragma once

#include <optional>
#include <vector>

#include "aerostat/types.hpp"

namespace aerostat {

enum class GoreMode { Zpns, Pumpkin };

/// Shape-finding inputs (Table-1 style vocabulary).
struct DesignInput {
  int n_gores = 0;                      // N
  double buoyancy = 0.0;                // b [N/m^3]
  double payload = 0.0;                 // L [N]
  double film_weight = 0.0;             // w_f [N/m^2]
  double tendon_weight = 0.0;           // w_t [N/m]
  double constant_pressure = 0.0;       // p0 [Pa]; 0 for ZPNS
  double bulge_radius = 0.0;            // r_B [m]; pumpkin only
  double endplate_diameter = 0.0;       // d1 [m]
  double circumferential_stress = 0.0;  // sigma_c [N/m]; 0 for ZPNS

  void validate(GoreMode mode) const;
};

struct GeneratorSample {
  double s;        // arc length [m]
  double R;        // radius [m]
  double Z;        // height [m]
  double theta;    // tangent angle from k [rad]
  double m;        // R*sigma_m [N]
  double sigma_m;  // meridional stress resultant [N/m]; m/R with floored R
  double kappa;    // generator curvature -theta' [1/m]
};

/// Converged generating curve Upsilon(s) = R(s) i + Z(s) k, densely sampled.
struct GeneratorCurve {
  std::vector<GeneratorSample> samples;
  double length = 0.0;        // L_d
  double launch_angle = 0.0;  // theta0
  double base_tension = 0.0;  // m(0) = R*sigma_m at the base
  double volume = 0.0;        // enclosed volume of the surface of revolution
  double r_max = 0.0;

  double sample_spacing() const { return length / double(samples.size() - 1); }
  // Piecewise-linear accessors over the dense grid.
  double R_at(double s) const;
  double Z_at(double s) const;
  double theta_at(double s) const;
  double kappa_at(double s) const;
  double m_at(double s) const;
};

/// Scalar form of the generator equilibrium system, state y = (R, Z, theta, m)
/// with m = R*sigma_m and p = b*Z + p0:
///   R' = sin(theta)
///   Z' = cos(theta)
///   theta' = -(R*p + R*w*sin(theta) - sigma_c*cos(theta)) / m
///   m' = sigma_c*sin(theta) + R*w*cos(theta)
/// The product R*w = R*w_f + N*w_t/(2*pi) smears the N tendon lines over the
/// circumference and stays regular as R -> 0. Throws NumericalError when
/// |m| < tension_floor.
Vec4 zpns_rhs(double s, const Vec4& y, const DesignInput& design,
              double tension_floor = 1e-12);

/// Two-parameter shooting for the generator BVP. Unknowns are (m0, L_d) with
/// theta0 = acos(L/(2*pi*m0)), which keeps the Jacobian sane for pumpkin
/// closures where theta0 approaches pi/2. Residuals:
///   r1 = R(L_d)/L_d                                  (closure at the top)
///   r2 = 2*pi*m(L_d)*cos(theta(L_d))/L               (zero apex load), or
///        (V(L_d) - volume_target)/volume_target       when a target is given.
/// The apex angle theta(L_d) itself is never constrained.
GeneratorCurve solve_zpns_generator(const DesignInput& design, double tol = 1e-9,
                                    std::optional<double> volume_target = std::nullopt,
                                    int n_samples = 4001);

/// Bulge angle from the wedge fit: the rib endpoint
///   Upsilon(s) + r_B (j sin v_B - b(s) cos v_B)
/// must lie on the half-plane y = tan(pi/N) x. Closed form
///   v_B = atan(c cos(theta)) + asin(c R / (r_B sqrt(1 + c^2 cos^2 theta))),
/// c = tan(pi/N). Requires c*R(s) <= r_B everywhere (else the rib circle
/// cannot reach the wedge): violations throw GeometryError ("infeasible lobe").
std::vector<double> compute_bulge_angle(const GeneratorCurve& gen, double r_B,
                                        int n_gores);

/// One shape-finding gore surface. For pumpkin mode, point(s, v) evaluates the
/// tubular map x(s,v) = Upsilon(s) + r_B (j sin v - b(s) cos v) with |v| <=
/// v_B(s) the rib arc angle. For ZPNS mode, v is the azimuth |v| <= pi/N and
/// the surface is the axisymmetric design shape.
struct GoreSurface3D {
  GoreMode mode = GoreMode::Zpns;
  int n_gores = 0;
  double r_B = 0.0;  // pumpkin only
  GeneratorCurve gen;
  std::vector<double> v_B;         // aligned with gen.samples (pumpkin)
  std::vector<double> centerline;  // cumulative centerline coordinate v_c(s)

  Vec3 point(double s, double v) const;
  double centerline_length() const { return centerline.back(); }
  double v_B_at(double s) const;
  /// Inverse of the centerline coordinate map (pumpkin); identity for ZPNS.
  double s_of_centerline(double v_c) const;
};

/// Tubular pumpkin gore. v_B is computed by the wedge fit unless a tabulated
/// profile (aligned with gen.samples) is supplied. Requires r_B*kappa < 1.
GoreSurface3D build_pumpkin_gore(const GeneratorCurve& gen, double r_B, int n_gores,
                                 std::optional<std::vector<double>> v_B_table =
                                     std::nullopt);

/// Developable ZPNS gore on the axisymmetric design surface.
GoreSurface3D build_zpns_gore(const GeneratorCurve& gen, int n_gores);

/// Flat lay-flat gore pattern: half-width h(v), 0 <= v <= L_c.
struct GorePattern {
  GoreMode mode = GoreMode::Zpns;
  std::vector<double> v;    // centerline coordinate samples
  std::vector<double> h;    // half-width at v
  std::vector<double> v_B;  // bulge angle resampled on v (pumpkin; empty else)
  double L_c = 0.0;         // centerline length
  double L_s = 0.0;         // seam length of the flat pattern
  double L_t = 0.0;         // tendon length
  double L_d = 0.0;         // generator length (bookkeeping)
  double r_B = 0.0;         // pumpkin only
  int n_gores = 0;

  double half_width(double vq) const;  // linear interpolation
};

/// Lay-flat extraction.
/// Pumpkin: dv = (1 + r_B kappa) ds, h = r_B v_B, L_t = int (1 + r_B kappa
/// cos v_B) ds, L_s = int sqrt(1 + h'^2) dv. ZPNS: v = s, h = (pi/N) R(s),
/// L_t = L_s (load tape sewn unstrained along the seam).
GorePattern layflat(const GoreSurface3D& gore);

}  // namespace aerostat
