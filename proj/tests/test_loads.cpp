#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <random>

#include "aerostat/loads.hpp"

using namespace aerostat;

namespace {

struct Tri {
  Vec3 a, b, c;
};

// unit cube as 12 outward triangles, base at z = 0
std::vector<Tri> unit_cube() {
  const Vec3 v[8] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                     {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  auto quad = [&](int i, int j, int k, int l, std::vector<Tri>& out) {
    out.push_back({v[i], v[j], v[k]});
    out.push_back({v[i], v[k], v[l]});
  };
  std::vector<Tri> t;
  quad(0, 3, 2, 1, t);  // bottom (outward = -z)
  quad(4, 5, 6, 7, t);  // top
  quad(0, 1, 5, 4, t);  // y = 0
  quad(2, 3, 7, 6, t);  // y = 1
  quad(1, 2, 6, 5, t);  // x = 1
  quad(3, 0, 4, 7, t);  // x = 0
  return t;
}

// icosphere by subdividing an icosahedron; 20 * 4^level facets
std::vector<Tri> icosphere(double r, int level, const Vec3& center = Vec3::Zero()) {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int i, int j) {
      const auto key = std::minmax(i, j);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[size_t(i)] + verts[size_t(j)]).normalized();
      verts.push_back(m);
      const int id = int(verts.size()) - 1;
      midpoint[key] = id;
      return id;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = next;
  }
  std::vector<Tri> out;
  for (const auto& f : faces)
    out.push_back({center + r * verts[size_t(f[0])], center + r * verts[size_t(f[1])],
                   center + r * verts[size_t(f[2])]});
  return out;
}

double total_volume(const std::vector<Tri>& tris) {
  double v = 0.0;
  for (const auto& t : tris) v += facet_volume_contribution(t.a, t.b, t.c);
  return v;
}

double total_pressure(const std::vector<Tri>& tris, double b, double p0) {
  double e = 0.0;
  for (const auto& t : tris) e += facet_pressure_potential(t.a, t.b, t.c, b, p0);
  return e;
}

}  // namespace

TEST_CASE("adj2 basics") {
  Mat32 F;
  F << 1, 0, 0, 1, 0, 0;
  CHECK((adj2(F) - Vec3(0, 0, 1)).norm() == 0.0);
}

TEST_CASE("facet volume: cube, orientation antisymmetry, icosphere") {
  auto cube = unit_cube();
  CHECK(total_volume(cube) == doctest::Approx(1.0).epsilon(1e-14));

  // reversing one facet flips the sign of its contribution
  const double before = total_volume(cube);
  const double c0 = facet_volume_contribution(cube[5].a, cube[5].b, cube[5].c);
  std::swap(cube[5].b, cube[5].c);
  CHECK(total_volume(cube) == doctest::Approx(before - 2.0 * c0).epsilon(1e-12));

  const auto sph = icosphere(2.0, 3);  // 1280 facets
  CHECK(sph.size() == 1280);
  const double exact = 4.0 / 3.0 * kPi * 8.0;
  CHECK(std::abs(total_volume(sph) - exact) / exact < 0.005);
}

TEST_CASE("pressure potential: cube, constant-z facet, tetra-decomposition oracle") {
  const double b = 0.37, p0 = 1.9;
  // unit cube with base at z=0: E_P = -(b/2 + p0)
  CHECK(total_pressure(unit_cube(), b, p0) ==
        doctest::Approx(-(0.5 * b + p0)).epsilon(1e-13));

  // facet in the plane z = c
  {
    const double zc = 1.7;
    const Vec3 a(0, 0, zc), bb(2, 0, zc), cc(0, 3, zc);
    const Vec3 av = 0.5 * (bb - a).cross(cc - a);
    CHECK(facet_pressure_potential(a, bb, cc, b, p0) ==
          doctest::Approx(-(0.5 * b * zc * zc + p0 * zc) * av.z()).epsilon(1e-13));
  }

  // random closed polyhedron: surface formula equals the tetra decomposition of
  // the volume integral of P about the origin (both exact for polynomials)
  auto tris = icosphere(1.0, 2, Vec3(0.3, -0.2, 2.0));
  for (auto& t : tris) {
    // smooth positional bump; shared vertices move identically, surface stays closed
    auto bump = [&](Vec3& p) {
      const double s = 0.15 * std::sin(3.0 * p.x()) * std::cos(2.0 * p.y()) *
                       std::sin(1.7 * p.z());
      p *= (1.0 + s);
    };
    bump(t.a);
    bump(t.b);
    bump(t.c);
  }
  double surf = total_pressure(tris, b, p0);
  double tetra = 0.0;
  for (const auto& t : tris) {
    const double v6 = t.a.dot(t.b.cross(t.c));
    const double zbar = (t.a.z() + t.b.z() + t.c.z()) / 4.0;  // tetra with origin
    // int over tetra of (b z + p0) dV = vol * (b zbar + p0)
    tetra += -(v6 / 6.0) * (b * zbar + p0);
  }
  CHECK(surf == doctest::Approx(tetra).epsilon(1e-10));
}

TEST_CASE("midpoint quadrature is exact for 1, z, z^2 on a facet") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)),
        c(u(rng), u(rng), u(rng));
    const Vec3 av = 0.5 * (b - a).cross(c - a);
    const double z0 = a.z(), z1 = b.z(), z2 = c.z();
    // exact integrals over the triangle (projected measure k.n dS = av.z dA')
    const double I0 = av.z();
    const double I1 = av.z() * (z0 + z1 + z2) / 3.0;
    const double I2 = av.z() *
                      (z0 * z0 + z1 * z1 + z2 * z2 + z0 * z1 + z1 * z2 + z2 * z0) / 6.0;
    // midpoint rule
    auto mid3 = [&](auto f) {
      return av.z() *
             (f(0.5 * (z0 + z1)) + f(0.5 * (z1 + z2)) + f(0.5 * (z2 + z0))) / 3.0;
    };
    CHECK(mid3([](double) { return 1.0; }) == doctest::Approx(I0).epsilon(1e-13));
    CHECK(mid3([](double z) { return z; }) == doctest::Approx(I1).epsilon(1e-12));
    CHECK(mid3([](double z) { return z * z; }) == doctest::Approx(I2).epsilon(1e-12));
  }
}

TEST_CASE("analytic pressure/volume gradients match finite differences") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double b = 0.068, p0 = 150.0;
  double worst_p = 0.0, worst_v = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::array<Vec3, 3> x = {Vec3(u(rng), u(rng), u(rng) + 3.0),
                             Vec3(u(rng) + 1, u(rng), u(rng) + 3.0),
                             Vec3(u(rng), u(rng) + 1, u(rng) + 3.0)};
    std::array<Vec3, 3> gp = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    std::array<Vec3, 3> gv = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    accumulate_pressure_gradient(x[0], x[1], x[2], b, p0, 1.0, &gp[0], &gp[1], &gp[2]);
    accumulate_volume_gradient(x[0], x[1], x[2], 1.0, &gv[0], &gv[1], &gv[2]);
    const double h = 1e-6;
    for (int n = 0; n < 3; ++n)
      for (int c = 0; c < 3; ++c) {
        auto xp = x, xm = x;
        xp[size_t(n)][c] += h;
        xm[size_t(n)][c] -= h;
        const double fdp = (facet_pressure_potential(xp[0], xp[1], xp[2], b, p0) -
                            facet_pressure_potential(xm[0], xm[1], xm[2], b, p0)) /
                           (2.0 * h);
        const double fdv = (facet_volume_contribution(xp[0], xp[1], xp[2]) -
                            facet_volume_contribution(xm[0], xm[1], xm[2])) /
                           (2.0 * h);
        worst_p = std::max(worst_p,
                           std::abs(fdp - gp[size_t(n)][c]) /
                               (std::abs(gp[size_t(n)][c]) + 1e-6));
        worst_v = std::max(worst_v,
                           std::abs(fdv - gv[size_t(n)][c]) /
                               (std::abs(gv[size_t(n)][c]) + 1e-6));
      }
  }
  CHECK(worst_p < 1e-6);
  CHECK(worst_v < 1e-6);
}

TEST_CASE("rigid translation identities on a closed surface") {
  const auto sph = icosphere(1.5, 2, Vec3(0.0, 0.0, 4.0));
  const double b = 0.51, p0 = 3.0;
  const double V = total_volume(sph);
  const double E0 = total_pressure(sph, b, p0);

  // volume gradient sums to zero over a closed surface
  Vec3 sum = Vec3::Zero();
  for (const auto& t : sph) {
    Vec3 g0 = Vec3::Zero(), g1 = Vec3::Zero(), g2 = Vec3::Zero();
    accumulate_volume_gradient(t.a, t.b, t.c, 1.0, &g0, &g1, &g2);
    sum += g0 + g1 + g2;
  }
  CHECK(sum.norm() < 1e-10 * V);

  // horizontal shifts leave E_P unchanged
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 shift(u(rng), u(rng), 0.0);
    auto moved = sph;
    for (auto& t : moved) {
      t.a += shift;
      t.b += shift;
      t.c += shift;
    }
    CHECK(std::abs(total_pressure(moved, b, p0) - E0) < 1e-10 * std::abs(E0));
  }

  // vertical shift: Delta E_P = -(b V) h - (b h^2/2 + ... ) exactly
  // leading term -b V h
  const double h = 1e-3;
  auto up = sph;
  for (auto& t : up) {
    t.a.z() += h;
    t.b.z() += h;
    t.c.z() += h;
  }
  const double dE = total_pressure(up, b, p0) - E0;
  CHECK(dE == doctest::Approx(-b * V * h).epsilon(1e-3));
}

TEST_CASE("volume continuity along a shrinking perturbation sequence") {
  const auto sph = icosphere(1.0, 2, Vec3(0, 0, 2));
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> dir(sph.size() * 3);
  for (auto& d : dir) d = Vec3(u(rng), u(rng), u(rng));
  const double V0 = total_volume(sph);
  double prev = 1e300;
  for (int k = 1; k <= 8; ++k) {
    const double t = std::pow(0.5, k);
    auto moved = sph;
    for (size_t i = 0; i < moved.size(); ++i) {
      moved[i].a += t * dir[3 * i];
      moved[i].b += t * dir[3 * i + 1];
      moved[i].c += t * dir[3 * i + 2];
    }
    const double diff = std::abs(total_volume(moved) - V0);
    // convergence order >= 1: halving t at least halves the gap (with slack)
    CHECK(diff <= 0.75 * prev);
    prev = diff;
  }
}

TEST_CASE("adj2 inequality sweeps") {
  const BoundsReport rep = verify_adj2_bounds(100000);
  CHECK(rep.violations == 0);
}

TEST_CASE("hydrostatic bound sweeps") {
  MaterialProps mat;
  mat.thickness = 32e-6;
  mat.youngs = 404.2e6;
  mat.poisson = 0.825;
  LoadSpec spec;
  spec.buoyancy = 0.068;
  spec.constant_pressure = 200.0;
  const BoundsReport rep = verify_load_bounds(spec, mat, 100.0, 100000, mat.poisson / 2.0);
  CHECK(rep.violations == 0);

  // x = 0: g_P = 0 trivially inside the bounds
  Mat32 F;
  F << 1, 0, 0, 1, 0, 0;
  const double gP = -(0.0) * adj2(F).z();
  CHECK(gP == 0.0);

  LoadSpec bad;
  bad.buoyancy = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("Archimedes consistency check") {
  LoadSpec s;
  s.buoyancy = 0.068;
  s.target_volume = 137023.0;
  s.design_buoyancy = 0.068;
  s.design_volume = 137023.0;
  REQUIRE(s.archimedes_mismatch().has_value());
  CHECK(*s.archimedes_mismatch() == doctest::Approx(0.0));
  s.design_volume = 137023.0 * 1.05;
  CHECK(*s.archimedes_mismatch() > 0.01);
  s.design_volume.reset();
  CHECK(!s.archimedes_mismatch().has_value());
}
