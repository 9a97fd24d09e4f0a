#pragma once

#include <cstdint>
#include <string>

#include "aerostat/material.hpp"
#include "aerostat/types.hpp"

namespace aerostat {

/// Pipkin partition of the membrane.
enum class Region { Slack, Wrinkled, Tense };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::Slack: return "S";
    case Region::Wrinkled: return "U";
    case Region::Tense: return "T";
  }
  return "?";
}

struct PrincipalStrains {
  double d1 = 0.0, d2 = 0.0;  // d1 >= d2
  Vec2 n1 = Vec2::UnitX(), n2 = Vec2::UnitY();
};

/// Eigen-decomposition of G = (F^T F - I)/2; d1 >= d2, orthonormal directions,
/// ties resolved to n1 = (1,0).
PrincipalStrains principal_strains(const Mat32& F);

/// Standard membrane strain energy density,
/// W_f = tau/2 (d1^2 + d2^2 + 2 nu d1 d2).
double film_energy(double d1, double d2, const MaterialProps& mat);

/// Same energy in terms of the Cauchy strains lambda_i^2 = 1 + 2 d_i
/// (cross-check form).
double film_energy_cauchy(double l1sq, double l2sq, const MaterialProps& mat);

/// Relaxed response at canonical ordering d1 >= d2. Branches in written order:
///   slack (d1<0, d2<0):            W* = 0
///   wrinkled (mu1<=0, d2>=0):      W* = tE/2 d2^2
///   wrinkled (mu2<=0, d1>=0):      W* = tE/2 d1^2
///   tense:                         W* = W_f
/// with mu_i the unrelaxed principal resultants tau(d_i + nu d_j). Relaxed
/// resultants mu_i* are never negative; beta_sq is Pipkin's wrinkling
/// parameter on the wrinkled branch (0 elsewhere).
struct RelaxedResponse {
  double W = 0.0;             // W_f* [J/m^2]
  double mu1 = 0.0;           // relaxed principal resultants [N/m], mu1 along n1
  double mu2 = 0.0;
  Region region = Region::Tense;
  double beta_sq = 0.0;
};

RelaxedResponse relaxed_energy(double d1, double d2, const MaterialProps& mat);

/// Analytic gradient dW*/dF = F S*(F). Continuous across branch boundaries
/// (the relaxation is C^1); exact boundaries use the tense-side expression.
Mat32 relaxed_energy_gradient(const Mat32& F, const MaterialProps& mat);

/// Full per-facet response record.
struct FacetResponse {
  Mat32 F = Mat32::Zero();
  Mat2 C = Mat2::Identity();
  double d1 = 0.0, d2 = 0.0;
  Vec2 n1 = Vec2::UnitX(), n2 = Vec2::UnitY();
  double mu1 = 0.0, mu2 = 0.0;  // relaxed resultants
  Region region = Region::Tense;
  double W_density = 0.0;
  double beta_sq = 0.0;
};

FacetResponse facet_response(const Mat32& F, const MaterialProps& mat);

/// Sampled verification of the paper's inequality chain: the W_f bounds in
/// |F|, 0 <= W* <= W_f <= W* + tau(1+nu)/4, nonnegative relaxed resultants,
/// and the quartic lower-bound lemma with rho = kappa2^2/(4(kappa1-alpha)).
struct BoundsReport {
  long checked = 0;
  long violations = 0;
  double worst_margin = 0.0;  // most negative slack seen (0 if all good)
  std::string note;
  bool ok() const { return violations == 0; }
};

BoundsReport verify_energy_bounds(const MaterialProps& mat, long samples,
                                  std::uint64_t seed = 20240801u);

}  // namespace aerostat
