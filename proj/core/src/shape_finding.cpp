#include "aerostat/shape_finding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aerostat/ode.hpp"

namespace aerostat {

namespace {

double interp_column(const std::vector<GeneratorSample>& smp, double s,
                     double GeneratorSample::*field) {
  if (smp.empty()) throw NumericalError("generator curve is empty");
  if (s <= smp.front().s) return smp.front().*field;
  if (s >= smp.back().s) return smp.back().*field;
  // uniform grid
  const double ds = (smp.back().s - smp.front().s) / double(smp.size() - 1);
  size_t i = std::min(size_t((s - smp.front().s) / ds), smp.size() - 2);
  while (i + 1 < smp.size() && smp[i + 1].s < s) ++i;
  while (i > 0 && smp[i].s > s) --i;
  const auto& a = smp[i];
  const auto& b = smp[i + 1];
  const double t = (s - a.s) / (b.s - a.s);
  return (1.0 - t) * (a.*field) + t * (b.*field);
}

double interp_at(const std::vector<double>& xs, const std::vector<double>& ys,
                 double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const size_t i = size_t(it - xs.begin()) - 1;
  const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return (1.0 - t) * ys[i] + t * ys[i + 1];
}

}  // namespace

void DesignInput::validate(GoreMode mode) const {
  if (n_gores < 3) throw ConfigError("design.n_gores must be >= 3");
  if (!(buoyancy > 0.0)) throw ConfigError("design.buoyancy must be > 0");
  if (payload < 0.0) throw ConfigError("design.payload must be >= 0");
  if (film_weight < 0.0) throw ConfigError("design.film_weight must be >= 0");
  if (tendon_weight < 0.0) throw ConfigError("design.tendon_weight must be >= 0");
  if (!(endplate_diameter > 0.0))
    throw ConfigError("design.endplate_diameter must be > 0");
  if (mode == GoreMode::Pumpkin && !(bulge_radius > 0.0))
    throw ConfigError("design.bulge_radius must be > 0 in pumpkin mode");
  if (mode == GoreMode::Zpns) {
    if (circumferential_stress != 0.0)
      throw ConfigError("design.circumferential_stress must be 0 in ZPNS mode");
    if (constant_pressure != 0.0)
      throw ConfigError("design.constant_pressure must be 0 in ZPNS mode");
  }
}

double GeneratorCurve::R_at(double s) const {
  return interp_column(samples, s, &GeneratorSample::R);
}
double GeneratorCurve::Z_at(double s) const {
  return interp_column(samples, s, &GeneratorSample::Z);
}
double GeneratorCurve::theta_at(double s) const {
  return interp_column(samples, s, &GeneratorSample::theta);
}
double GeneratorCurve::kappa_at(double s) const {
  return interp_column(samples, s, &GeneratorSample::kappa);
}
double GeneratorCurve::m_at(double s) const {
  return interp_column(samples, s, &GeneratorSample::m);
}

Vec4 zpns_rhs(double s, const Vec4& y, const DesignInput& d, double tension_floor) {
  const double R = y[0], Z = y[1], theta = y[2], m = y[3];
  if (!(std::abs(m) > tension_floor)) {
    std::ostringstream os;
    os << "zpns_rhs: meridional tension R*sigma_m = " << m
       << " below floor at s = " << s;
    throw NumericalError(os.str());
  }
  const double p = d.buoyancy * Z + d.constant_pressure;
  const double sigc = d.circumferential_stress;
  // R*w, regular at R = 0
  const double Rw = R * d.film_weight + d.n_gores * d.tendon_weight / (2.0 * kPi);
  Vec4 dy;
  dy[0] = std::sin(theta);
  dy[1] = std::cos(theta);
  dy[2] = -(R * p + Rw * std::sin(theta) - sigc * std::cos(theta)) / m;
  dy[3] = sigc * std::sin(theta) + Rw * std::cos(theta);
  return dy;
}

namespace {

// Internal 5-state integration: (R, Z, theta, m, V) with V' = pi R^2 cos(theta).
using Vec5 = Eigen::Matrix<double, 5, 1>;

Vec5 rhs5(double s, const Vec5& y, const DesignInput& d) {
  Vec4 y4 = y.head<4>();
  const Vec4 d4 = zpns_rhs(s, y4, d, 1e-12);
  Vec5 dy;
  dy.head<4>() = d4;
  dy[4] = kPi * y[0] * y[0] * std::cos(y[2]);
  return dy;
}

struct ShotResult {
  double Ld;
  Vec5 y_end;
  bool closed;  // R crossed zero
};

// Integrate from the base with given m0 until R crosses zero (or s_max).
ShotResult shoot_until_closure(const DesignInput& d, double m0, double s_max) {
  const double theta0 = std::acos(d.payload / (2.0 * kPi * m0));
  Vec5 y0;
  y0 << 0.5 * d.endplate_diameter, 0.0, theta0, m0, 0.0;
  Rk45<5> ode;
  ode.rtol = 1e-11;
  ode.atol = 1e-13;
  ode.max_step = s_max / 50.0;
  auto rhs = [&](double s, const Vec5& y) { return rhs5(s, y, d); };
  double s_event = 0.0;
  const Vec5 y_end = ode.integrate_until(
      rhs, 0.0, y0, s_max, [](double, const Vec5& y) { return y[0]; }, &s_event);
  if (std::isnan(s_event)) return {s_max, y_end, false};
  return {s_event, y_end, true};
}

// Fixed-length integration for the Newton residuals.
Vec5 integrate_fixed(const DesignInput& d, double m0, double Ld) {
  const double theta0 = std::acos(d.payload / (2.0 * kPi * m0));
  Vec5 y0;
  y0 << 0.5 * d.endplate_diameter, 0.0, theta0, m0, 0.0;
  Rk45<5> ode;
  ode.rtol = 1e-11;
  ode.atol = 1e-13;
  ode.max_step = Ld / 50.0;
  auto rhs = [&](double s, const Vec5& y) { return rhs5(s, y, d); };
  return ode.integrate_to(rhs, 0.0, y0, Ld);
}

}  // namespace

GeneratorCurve solve_zpns_generator(const DesignInput& design, double tol,
                                    std::optional<double> volume_target,
                                    int n_samples) {
  const GoreMode mode =
      design.constant_pressure != 0.0 || design.bulge_radius > 0.0
          ? GoreMode::Pumpkin
          : GoreMode::Zpns;
  design.validate(mode);
  if (!(design.payload > 0.0))
    throw ConfigError("shape finding: zero payload gives zero base tension, no shape");
  if (volume_target && !(*volume_target > 0.0))
    throw ConfigError("shape finding: volume target must be > 0");

  const double L = design.payload;
  const double m_min = L / (2.0 * kPi);

  // residuals at (m0, Ld)
  auto residual = [&](double m0, double Ld) -> Vec2 {
    const Vec5 y = integrate_fixed(design, m0, Ld);
    Vec2 r;
    r[0] = y[0] / Ld;
    if (volume_target)
      r[1] = (y[4] - *volume_target) / *volume_target;
    else
      r[1] = 2.0 * kPi * y[3] * std::cos(y[2]) / L;
    return r;
  };

  // Bracket scan over m0 on a log grid; Ld always taken from the R=0 event.
  const double s_max_cap = 5e4;
  double lo_m = 0.0, hi_m = 0.0;
  double lo_r = 0.0;
  double lo_Ld = 0.0, hi_Ld = 0.0;
  {
    double prev_m = 0.0, prev_r = 0.0, prev_Ld = 0.0;
    bool have_prev = false;
    const int n_scan = 120;
    for (int i = 0; i < n_scan; ++i) {
      const double f = double(i) / double(n_scan - 1);
      const double m0 = m_min * 1.0005 * std::pow(2.0e7 / 1.0005, f);
      ShotResult shot;
      try {
        shot = shoot_until_closure(design, m0, s_max_cap);
      } catch (const NumericalError&) {
        have_prev = false;
        continue;
      }
      if (!shot.closed) {
        have_prev = false;
        continue;
      }
      const double r2 = volume_target
                            ? (shot.y_end[4] - *volume_target) / *volume_target
                            : 2.0 * kPi * shot.y_end[3] * std::cos(shot.y_end[2]) / L;
      if (have_prev && prev_r * r2 < 0.0) {
        lo_m = prev_m;
        hi_m = m0;
        lo_r = prev_r;
        lo_Ld = prev_Ld;
        hi_Ld = shot.Ld;
        break;
      }
      prev_m = m0;
      prev_r = r2;
      prev_Ld = shot.Ld;
      have_prev = true;
    }
  }
  if (lo_m == 0.0)
    throw ShootingError(
        "shape finding: no sign change of the closure residual over the base-tension "
        "scan; design cannot close (check payload, weights, pressure)");

  // Bisection on m0 to get a solid Newton start.
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo_m * hi_m);
    ShotResult shot = shoot_until_closure(design, mid, s_max_cap);
    if (!shot.closed) throw ShootingError("shape finding: closure lost during bisection");
    const double r2 = volume_target
                          ? (shot.y_end[4] - *volume_target) / *volume_target
                          : 2.0 * kPi * shot.y_end[3] * std::cos(shot.y_end[2]) / L;
    if (lo_r * r2 <= 0.0) {
      hi_m = mid;
      hi_Ld = shot.Ld;
    } else {
      lo_m = mid;
      lo_r = r2;
      lo_Ld = shot.Ld;
    }
    if (hi_m / lo_m < 1.0 + 1e-10) break;
  }

  // Damped Newton on (m0, Ld) with finite-difference Jacobian.
  double m0 = 0.5 * (lo_m + hi_m);
  double Ld = 0.5 * (lo_Ld + hi_Ld);
  Vec2 r = residual(m0, Ld);
  bool converged = false;
  for (int it = 0; it < 60; ++it) {
    if (std::max(std::abs(r[0]), std::abs(r[1])) < tol) {
      converged = true;
      break;
    }
    const double dm = 1e-7 * m0;
    const double dL = 1e-7 * Ld;
    const Vec2 rm = residual(m0 + dm, Ld);
    const Vec2 rL = residual(m0, Ld + dL);
    Mat2 J;
    J.col(0) = (rm - r) / dm;
    J.col(1) = (rL - r) / dL;
    const Vec2 step = J.fullPivLu().solve(-r);
    double alpha = 1.0;
    const double r_norm = r.norm();
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      const double m_try = m0 + alpha * step[0];
      const double L_try = Ld + alpha * step[1];
      if (m_try > m_min * 1.000001 && L_try > 0.0) {
        Vec2 r_try;
        bool ok = true;
        try {
          r_try = residual(m_try, L_try);
        } catch (const NumericalError&) {
          ok = false;
        }
        if (ok && r_try.norm() < r_norm * (1.0 - 1e-4 * alpha)) {
          m0 = m_try;
          Ld = L_try;
          r = r_try;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  if (!converged && std::max(std::abs(r[0]), std::abs(r[1])) >= tol) {
    std::ostringstream os;
    os << "shape finding: shooting did not converge, residuals (closure, "
       << (volume_target ? "volume" : "apex force") << ") = (" << r[0] << ", " << r[1]
       << ")";
    throw ShootingError(os.str());
  }

  // Dense re-integration and uniform resampling.
  const double theta0 = std::acos(L / (2.0 * kPi * m0));
  Vec5 y0;
  y0 << 0.5 * design.endplate_diameter, 0.0, theta0, m0, 0.0;
  Rk45<5> ode;
  ode.rtol = 1e-11;
  ode.atol = 1e-13;
  ode.max_step = Ld / 200.0;
  auto rhs = [&](double s, const Vec5& y) { return rhs5(s, y, design); };
  const auto nodes = ode.integrate_dense(rhs, 0.0, y0, Ld);

  GeneratorCurve gen;
  gen.length = Ld;
  gen.launch_angle = theta0;
  gen.base_tension = m0;
  gen.samples.resize(n_samples);
  double r_max = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double s = Ld * double(i) / double(n_samples - 1);
    const Vec5 y = hermite_sample<5>(nodes, s);
    GeneratorSample& smp = gen.samples[i];
    smp.s = s;
    smp.R = (i == n_samples - 1) ? std::max(y[0], 0.0) : y[0];
    smp.Z = y[1];
    smp.theta = y[2];
    smp.m = y[3];
    r_max = std::max(r_max, smp.R);
  }
  gen.r_max = r_max;
  const double r_floor = 1e-9 * r_max;
  for (int i = 0; i < n_samples; ++i) {
    GeneratorSample& smp = gen.samples[i];
    smp.sigma_m = smp.m / std::max(smp.R, r_floor);
    Vec4 y4;
    y4 << smp.R, smp.Z, smp.theta, smp.m;
    smp.kappa = -zpns_rhs(smp.s, y4, design)[2];
  }
  gen.volume = hermite_sample<5>(nodes, Ld)[4];

  // Final sanity per the type invariants.
  if (std::abs(gen.samples.back().R) > 1e-6 * std::max(1.0, r_max))
    throw ShootingError("shape finding: top closure tolerance not met after polish");
  return gen;
}

std::vector<double> compute_bulge_angle(const GeneratorCurve& gen, double r_B,
                                        int n_gores) {
  if (!(r_B > 0.0)) throw ConfigError("bulge radius must be > 0");
  if (n_gores < 3) throw ConfigError("n_gores must be >= 3");
  const double c = std::tan(kPi / n_gores);
  std::vector<double> v_B(gen.samples.size());
  for (size_t i = 0; i < gen.samples.size(); ++i) {
    const double R = std::max(gen.samples[i].R, 0.0);
    const double ct = std::cos(gen.samples[i].theta);
    const double A = r_B * std::sqrt(1.0 + c * c * ct * ct);
    const double arg = c * R / A;
    // Feasibility: the rib circle reaches the wedge iff c*R <= r_B
    // (equivalently v_B <= pi/2).
    if (c * R > r_B * (1.0 + 1e-9)) {
      std::ostringstream os;
      os << "infeasible lobe: tan(pi/N)*R = " << c * R << " exceeds r_B = " << r_B
         << " at s = " << gen.samples[i].s
         << " (rib circle cannot reach the wedge plane)";
      throw GeometryError(os.str());
    }
    v_B[i] = std::atan(c * ct) + std::asin(std::min(arg, 1.0));
  }
  return v_B;
}

Vec3 GoreSurface3D::point(double s, double v) const {
  const double R = gen.R_at(s);
  const double Z = gen.Z_at(s);
  if (mode == GoreMode::Zpns) {
    return Vec3(R * std::cos(v), R * std::sin(v), Z);
  }
  const double theta = gen.theta_at(s);
  // b = t x j = (-cos theta, 0, sin theta); x = Upsilon + r_B (j sin v - b cos v)
  const double cb = std::cos(v), sb = std::sin(v);
  return Vec3(R + r_B * cb * std::cos(theta), r_B * sb, Z - r_B * cb * std::sin(theta));
}

double GoreSurface3D::v_B_at(double s) const {
  if (mode == GoreMode::Zpns) return kPi / n_gores;
  std::vector<double> ss(gen.samples.size());
  for (size_t i = 0; i < ss.size(); ++i) ss[i] = gen.samples[i].s;
  return interp_at(ss, v_B, s);
}

double GoreSurface3D::s_of_centerline(double v_c) const {
  if (mode == GoreMode::Zpns) return v_c;
  std::vector<double> ss(gen.samples.size());
  for (size_t i = 0; i < ss.size(); ++i) ss[i] = gen.samples[i].s;
  return interp_at(centerline, ss, v_c);
}

GoreSurface3D build_pumpkin_gore(const GeneratorCurve& gen, double r_B, int n_gores,
                                 std::optional<std::vector<double>> v_B_table) {
  GoreSurface3D g;
  g.mode = GoreMode::Pumpkin;
  g.n_gores = n_gores;
  g.r_B = r_B;
  g.gen = gen;
  if (v_B_table) {
    if (v_B_table->size() != gen.samples.size())
      throw ConfigError("tabulated v_B must align with the generator samples");
    g.v_B = std::move(*v_B_table);
  } else {
    g.v_B = compute_bulge_angle(gen, r_B, n_gores);
  }
  // no self-intersecting tube
  for (const auto& smp : gen.samples) {
    if (r_B * smp.kappa >= 1.0 || 1.0 + r_B * smp.kappa <= 0.0) {
      std::ostringstream os;
      os << "tube fold: r_B*kappa = " << r_B * smp.kappa << " at s = " << smp.s;
      throw GeometryError(os.str());
    }
  }
  // centerline coordinate v_c(s) = int (1 + r_B kappa) ds (trapezoid)
  g.centerline.resize(gen.samples.size());
  g.centerline[0] = 0.0;
  for (size_t i = 1; i < gen.samples.size(); ++i) {
    const double ds = gen.samples[i].s - gen.samples[i - 1].s;
    const double fa = 1.0 + r_B * gen.samples[i - 1].kappa;
    const double fb = 1.0 + r_B * gen.samples[i].kappa;
    g.centerline[i] = g.centerline[i - 1] + 0.5 * (fa + fb) * ds;
  }
  return g;
}

GoreSurface3D build_zpns_gore(const GeneratorCurve& gen, int n_gores) {
  GoreSurface3D g;
  g.mode = GoreMode::Zpns;
  g.n_gores = n_gores;
  g.gen = gen;
  g.centerline.resize(gen.samples.size());
  for (size_t i = 0; i < gen.samples.size(); ++i) g.centerline[i] = gen.samples[i].s;
  return g;
}

double GorePattern::half_width(double vq) const {
  return interp_at(v, h, vq);
}

GorePattern layflat(const GoreSurface3D& gore) {
  const auto& smp = gore.gen.samples;
  GorePattern pat;
  pat.mode = gore.mode;
  pat.n_gores = gore.n_gores;
  pat.r_B = gore.r_B;
  pat.L_d = gore.gen.length;
  const size_t n = smp.size();
  pat.v.resize(n);
  pat.h.resize(n);

  if (gore.mode == GoreMode::Pumpkin) {
    pat.v = gore.centerline;
    pat.v_B = gore.v_B;
    for (size_t i = 0; i < n; ++i) pat.h[i] = gore.r_B * gore.v_B[i];
    pat.L_c = gore.centerline.back();
    // L_t = int (1 + r_B kappa cos v_B) ds
    double Lt = 0.0;
    for (size_t i = 1; i < n; ++i) {
      const double ds = smp[i].s - smp[i - 1].s;
      const double fa = 1.0 + gore.r_B * smp[i - 1].kappa * std::cos(gore.v_B[i - 1]);
      const double fb = 1.0 + gore.r_B * smp[i].kappa * std::cos(gore.v_B[i]);
      Lt += 0.5 * (fa + fb) * ds;
    }
    pat.L_t = Lt;
  } else {
    for (size_t i = 0; i < n; ++i) {
      pat.v[i] = smp[i].s;
      pat.h[i] = kPi * std::max(smp[i].R, 0.0) / gore.n_gores;
    }
    pat.L_c = gore.gen.length;
  }
  // gore comes to a point at the top
  pat.h.back() = 0.0;

  // L_s = int sqrt(1 + h'^2) dv with central-difference h'
  std::vector<double> hp(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t a = (i == 0) ? 0 : i - 1;
    const size_t b = (i + 1 == n) ? i : i + 1;
    hp[i] = (pat.h[b] - pat.h[a]) / (pat.v[b] - pat.v[a]);
  }
  double Ls = 0.0;
  for (size_t i = 1; i < n; ++i) {
    const double fa = std::sqrt(1.0 + hp[i - 1] * hp[i - 1]);
    const double fb = std::sqrt(1.0 + hp[i] * hp[i]);
    Ls += 0.5 * (fa + fb) * (pat.v[i] - pat.v[i - 1]);
  }
  pat.L_s = Ls;
  if (gore.mode == GoreMode::Zpns) pat.L_t = pat.L_s;

  for (size_t i = 1; i + 1 < n; ++i)
    if (!(pat.h[i] > 0.0))
      throw GeometryError("layflat: nonpositive half-width inside the pattern");
  return pat;
}

double pairwise_sum(const std::vector<double>& v) {
  // iterative pairwise reduction, order-deterministic
  if (v.empty()) return 0.0;
  std::vector<double> acc(v);
  size_t n = acc.size();
  while (n > 1) {
    const size_t half = n / 2;
    for (size_t i = 0; i < half; ++i) acc[i] = acc[2 * i] + acc[2 * i + 1];
    if (n % 2 == 1) {
      acc[half] = acc[n - 1];
      n = half + 1;
    } else {
      n = half;
    }
  }
  return acc[0];
}

}  // namespace aerostat
