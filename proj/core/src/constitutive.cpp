#include "aerostat/constitutive.hpp"

#include <cmath>
#include <random>

namespace aerostat {

PrincipalStrains principal_strains(const Mat32& F) {
  const Mat2 C = F.transpose() * F;
  const double g11 = 0.5 * (C(0, 0) - 1.0);
  const double g22 = 0.5 * (C(1, 1) - 1.0);
  const double g12 = 0.5 * C(0, 1);
  const double mean = 0.5 * (g11 + g22);
  const double diff = 0.5 * (g11 - g22);
  const double rad = std::hypot(diff, g12);

  PrincipalStrains ps;
  ps.d1 = mean + rad;
  ps.d2 = mean - rad;
  if (rad < 1e-14 * std::max(1.0, std::abs(mean))) {
    ps.n1 = Vec2(1.0, 0.0);
    ps.n2 = Vec2(0.0, 1.0);
    return ps;
  }
  // eigenvector for d1; pick the better-conditioned column
  Vec2 a(g12, ps.d1 - g11);
  Vec2 b(ps.d1 - g22, g12);
  ps.n1 = (a.squaredNorm() > b.squaredNorm() ? a : b).normalized();
  ps.n2 = Vec2(-ps.n1.y(), ps.n1.x());
  return ps;
}

double film_energy(double d1, double d2, const MaterialProps& mat) {
  return 0.5 * mat.tau() * (d1 * d1 + d2 * d2 + 2.0 * mat.poisson * d1 * d2);
}

double film_energy_cauchy(double l1sq, double l2sq, const MaterialProps& mat) {
  const double nu = mat.poisson;
  return 0.125 * mat.tau() *
         (l1sq * l1sq + l2sq * l2sq + 2.0 * nu * l1sq * l2sq -
          2.0 * (1.0 + nu) * (l1sq + l2sq) + 2.0 * (1.0 + nu));
}

RelaxedResponse relaxed_energy(double d1, double d2, const MaterialProps& mat) {
  const double tau = mat.tau();
  const double nu = mat.poisson;
  const double tE = mat.te();
  const double mu1 = tau * (d1 + nu * d2);
  const double mu2 = tau * (d2 + nu * d1);

  RelaxedResponse r;
  if (d1 < 0.0 && d2 < 0.0) {
    r.region = Region::Slack;
    return r;
  }
  if (mu1 <= 0.0 && d2 >= 0.0) {
    r.region = Region::Wrinkled;
    r.W = 0.5 * tE * d2 * d2;
    r.mu2 = tE * d2;
    r.beta_sq = -mu1 / tau;
    return r;
  }
  if (mu2 <= 0.0 && d1 >= 0.0) {
    r.region = Region::Wrinkled;
    r.W = 0.5 * tE * d1 * d1;
    r.mu1 = tE * d1;
    r.beta_sq = -mu2 / tau;
    return r;
  }
  r.region = Region::Tense;
  r.W = film_energy(d1, d2, mat);
  r.mu1 = mu1;
  r.mu2 = mu2;
  return r;
}

Mat32 relaxed_energy_gradient(const Mat32& F, const MaterialProps& mat) {
  const PrincipalStrains ps = principal_strains(F);
  const RelaxedResponse r = relaxed_energy(ps.d1, ps.d2, mat);
  // dW*/dF = F S*, S* = mu1* n1 n1^T + mu2* n2 n2^T  (2nd Piola-Kirchhoff)
  const Mat2 S = r.mu1 * ps.n1 * ps.n1.transpose() + r.mu2 * ps.n2 * ps.n2.transpose();
  return F * S;
}

FacetResponse facet_response(const Mat32& F, const MaterialProps& mat) {
  const PrincipalStrains ps = principal_strains(F);
  const RelaxedResponse r = relaxed_energy(ps.d1, ps.d2, mat);
  FacetResponse out;
  out.F = F;
  out.C = F.transpose() * F;
  out.d1 = ps.d1;
  out.d2 = ps.d2;
  out.n1 = ps.n1;
  out.n2 = ps.n2;
  out.mu1 = r.mu1;
  out.mu2 = r.mu2;
  out.region = r.region;
  out.W_density = r.W;
  out.beta_sq = r.beta_sq;
  return out;
}

BoundsReport verify_energy_bounds(const MaterialProps& mat, long samples,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> mag(0.01, 10.0);

  const double tau = mat.tau();
  const double nu = mat.poisson;
  const double gap = 0.25 * tau * (1.0 + nu);

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
    Mat32 F;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c) F(r, c) = unit(rng);
    const double n = F.norm();
    if (n > 1e-12) F *= mag(rng) / n;
    const double nF2 = F.squaredNorm();
    const double nF4 = nF2 * nF2;

    const PrincipalStrains ps = principal_strains(F);
    const double Wf = film_energy(ps.d1, ps.d2, mat);
    const RelaxedResponse rel = relaxed_energy(ps.d1, ps.d2, mat);

    const double tol = 1e-10 * tau * std::max(1.0, nF4);
    const double lower =
        0.125 * tau * (nu * nF4 - 2.0 * (1.0 + nu) * nF2 + 2.0 * (1.0 + nu));
    const double upper = 0.125 * tau * nF4 + gap;
    check(Wf >= lower - tol, Wf - lower, "WfBounds lower");
    check(Wf <= upper + tol, upper - Wf, "WfBounds upper");
    check(rel.W >= -tol, rel.W, "W* >= 0");
    check(rel.W <= Wf + tol, Wf - rel.W, "W* <= Wf");
    check(Wf <= rel.W + gap + tol, rel.W + gap - Wf, "Wf <= W* + gap");
    check(rel.mu1 >= -tol && rel.mu2 >= -tol, std::min(rel.mu1, rel.mu2),
          "relaxed resultants nonnegative");
  }

  // quartic lower-bound lemma: alpha|u|^4 - rho <= k1|u|^4 - k2|u|^2 <= gamma|u|^4
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  const long lemma_samples = std::max(1L, samples / 10);
  for (long i = 0; i < lemma_samples; ++i) {
    const double k1 = pos(rng);
    const double k2 = pos(rng);
    const double alpha = k1 * std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    const double gamma = k1 * (1.0 + pos(rng));
    const double rho = k2 * k2 / (4.0 * (k1 - alpha));
    for (int j = 0; j < 16; ++j) {
      const double u2 = mag(rng) * mag(rng);
      const double mid = k1 * u2 * u2 - k2 * u2;
      const double tol = 1e-12 * (1.0 + std::abs(mid));
      check(alpha * u2 * u2 - rho <= mid + tol, mid - (alpha * u2 * u2 - rho),
            "lemma lower");
      check(mid <= gamma * u2 * u2 + tol, gamma * u2 * u2 - mid, "lemma upper");
    }
  }
  return rep;
}

}  // namespace aerostat
