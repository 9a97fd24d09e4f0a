#include "aerostat/loads.hpp"

#include <cmath>
#include <random>

namespace aerostat {

double facet_volume_contribution(const Vec3& x0, const Vec3& x1, const Vec3& x2) {
  return x0.dot(x1.cross(x2)) / 6.0;
}

double facet_pressure_potential(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                                double b, double p0) {
  const Vec3 a = 0.5 * (x1 - x0).cross(x2 - x0);
  auto phi = [&](double z) { return 0.5 * b * z * z + p0 * z; };
  const double z01 = 0.5 * (x0.z() + x1.z());
  const double z12 = 0.5 * (x1.z() + x2.z());
  const double z20 = 0.5 * (x2.z() + x0.z());
  return -a.z() * (phi(z01) + phi(z12) + phi(z20)) / 3.0;
}

void accumulate_volume_gradient(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                                double w, Vec3* g0, Vec3* g1, Vec3* g2) {
  *g0 += w / 6.0 * x1.cross(x2);
  *g1 += w / 6.0 * x2.cross(x0);
  *g2 += w / 6.0 * x0.cross(x1);
}

void accumulate_pressure_gradient(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                                  double b, double p0, double w, Vec3* g0, Vec3* g1,
                                  Vec3* g2) {
  const Vec3 u = x1 - x0, v = x2 - x0;
  const Vec3 a = 0.5 * u.cross(v);
  auto phi = [&](double z) { return 0.5 * b * z * z + p0 * z; };
  auto dphi = [&](double z) { return b * z + p0; };
  const double z01 = 0.5 * (x0.z() + x1.z());
  const double z12 = 0.5 * (x1.z() + x2.z());
  const double z20 = 0.5 * (x2.z() + x0.z());
  const double Phi = (phi(z01) + phi(z12) + phi(z20)) / 3.0;

  // d(k.a)/dx: k.a = 0.5 k.(u x v); du -> 0.5 (v x k), dv -> 0.5 (k x u)
  const Vec3 dadx1 = 0.5 * v.cross(Vec3::UnitZ());
  const Vec3 dadx2 = 0.5 * Vec3::UnitZ().cross(u);
  const Vec3 dadx0 = -dadx1 - dadx2;

  // dPhi/dz_i through the edge midpoints containing node i
  const double dPhi0 = (dphi(z01) + dphi(z20)) / 6.0;
  const double dPhi1 = (dphi(z01) + dphi(z12)) / 6.0;
  const double dPhi2 = (dphi(z12) + dphi(z20)) / 6.0;

  *g0 += w * (-(dadx0 * Phi) - Vec3(0, 0, a.z() * dPhi0));
  *g1 += w * (-(dadx1 * Phi) - Vec3(0, 0, a.z() * dPhi1));
  *g2 += w * (-(dadx2 * Phi) - Vec3(0, 0, a.z() * dPhi2));
}

namespace {

Mat32 random_mat32(std::mt19937_64& rng, double max_norm) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> mag(1e-3, max_norm);
  Mat32 F;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) F(r, c) = unit(rng);
  const double n = F.norm();
  if (n > 1e-12) F *= mag(rng) / n;
  return F;
}

}  // namespace

BoundsReport verify_adj2_bounds(long samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BoundsReport rep;
  auto check = [&](bool cond, double margin, const char* what) {
    rep.checked++;
    if (!cond) {
      rep.violations++;
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.note = what;
      }
    }
  };
  for (long i = 0; i < samples; ++i) {
    const Mat32 A = random_mat32(rng, 10.0);
    const Mat32 B = random_mat32(rng, 10.0);
    const double tol = 1e-12 * (1.0 + A.squaredNorm() + B.squaredNorm());
    check(std::abs(adj2(A).z()) <= A.squaredNorm() + tol,
          A.squaredNorm() - std::abs(adj2(A).z()), "|adj2 F . k| <= |F|^2");
    const double lhs = (adj2(A) - adj2(B)).norm();
    const double rhs = 3.0 * (A.norm() + B.norm()) * (A - B).norm();
    check(lhs <= rhs + tol, rhs - lhs, "adj2 Lipschitz beta=3");
  }
  return rep;
}

BoundsReport verify_load_bounds(const LoadSpec& spec, const MaterialProps& mat,
                                double R_bound, long samples, double nu1,
                                double theta1, std::uint64_t seed) {
  if (!(R_bound > 0.0)) throw ConfigError("verify_load_bounds: R_bound must be > 0");
  const double nu = mat.poisson;
  if (nu1 <= 0.0) nu1 = 0.5 * nu;
  if (!(nu1 < nu)) throw ConfigError("verify_load_bounds: need 0 < nu1 < nu");
  if (!(theta1 > 1.0)) throw ConfigError("verify_load_bounds: need theta1 > 1");

  const double b = spec.buoyancy;
  const double p0 = spec.constant_pressure;
  const double tau = mat.tau();
  const double capR = 0.5 * b * R_bound * R_bound + std::abs(p0) * R_bound;
  const double rho1 =
      std::pow(tau * (1.0 + nu) + 2.0 * b * R_bound * R_bound +
                   4.0 * std::abs(p0) * R_bound,
               2) /
      (8.0 * tau * (nu - nu1));
  const double rho2 = std::pow(b * R_bound * R_bound + 2.0 * std::abs(p0) * R_bound, 2) /
                      (2.0 * tau * (theta1 - 1.0));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  BoundsReport rep;
  auto check = [&](bool cond, double margin, const char* what) {
    rep.checked++;
    if (!cond) {
      rep.violations++;
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.note = what;
      }
    }
  };

  for (long i = 0; i < samples; ++i) {
    // random x with |x| <= R
    Vec3 x(unit(rng), unit(rng), unit(rng));
    if (x.norm() > 1e-12)
      x *= R_bound * std::pow(std::abs(unit(rng)), 1.0 / 3.0) / x.norm();
    const Mat32 F = random_mat32(rng, 10.0);
    const double z = x.z();
    const double gP = -(0.5 * b * z * z + p0 * z) * adj2(F).z();
    const double nF2 = F.squaredNorm();
    const double nF4 = nF2 * nF2;
    const double tol = 1e-10 * (1.0 + capR * nF2);

    check(gP >= -capR * nF2 - tol, gP + capR * nF2, "fPBounds lower");
    check(gP <= capR * nF2 + tol, capR * nF2 - gP, "fPBounds upper");

    const PrincipalStrains ps = principal_strains(F);
    const RelaxedResponse rel = relaxed_energy(ps.d1, ps.d2, mat);
    const double mid = rel.W + gP + rho1;
    const double lo = 0.125 * tau * nu1 * nF4;
    const double hi = 0.125 * tau * theta1 * nF4 + 0.25 * tau * (1.0 + nu) + rho1 + rho2;
    const double tol2 = 1e-10 * (tau + std::abs(mid) + hi);
    check(lo <= mid + tol2, mid - lo, "ImportantIneq lower");
    check(mid <= hi + tol2, hi - mid, "ImportantIneq upper");
  }
  return rep;
}

}  // namespace aerostat
