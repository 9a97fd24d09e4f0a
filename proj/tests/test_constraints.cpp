#include <doctest.h>

#include <cmath>
#include <random>

#include "aerostat/constraints.hpp"
#include "aerostat/loads.hpp"

using namespace aerostat;

namespace {

// minimal mesh with one seam for constraint assembly tests
RefMesh line_mesh(int n_nodes) {
  RefMesh m;
  m.nodes_uv.resize(size_t(n_nodes), Vec2::Zero());
  m.dofs.assign(size_t(n_nodes), NodeConstraint{});
  std::vector<int> seam(size_t(n_nodes));
  for (int i = 0; i < n_nodes; ++i) seam[size_t(i)] = i;
  m.seams = {seam};
  m.multiplicity = 1.0;
  m.n_gores = 4;
  return m;
}

}  // namespace

TEST_CASE("tendon length: straight, semicircle, refinement monotonicity") {
  // straight seam, 6 nodes, length 5
  {
    DeformationState st;
    for (int i = 0; i < 6; ++i) st.positions.push_back(Vec3(0, 0, i));
    std::vector<int> seam = {0, 1, 2, 3, 4, 5};
    CHECK(tendon_length(st, seam) == doctest::Approx(5.0).epsilon(1e-14));
  }
  // unit semicircle sampled at 100 nodes -> pi within 2e-4
  {
    DeformationState st;
    std::vector<int> seam;
    const int n = 100;
    for (int i = 0; i < n; ++i) {
      const double a = kPi * double(i) / double(n - 1);
      st.positions.push_back(Vec3(std::cos(a), std::sin(a), 0));
      seam.push_back(i);
    }
    CHECK(std::abs(tendon_length(st, seam) - kPi) < 2e-4);
  }
  // polyline length grows monotonically toward the smooth limit
  {
    double prev = 0.0;
    for (int n : {8, 16, 32, 64, 128, 256}) {
      DeformationState st;
      std::vector<int> seam;
      for (int i = 0; i < n; ++i) {
        const double a = kPi * double(i) / double(n - 1);
        st.positions.push_back(Vec3(std::cos(a), std::sin(a), 0));
        seam.push_back(i);
      }
      const double len = tendon_length(st, seam);
      CHECK(len >= prev);
      prev = len;
    }
    CHECK(prev <= kPi + 1e-12);
  }
}

TEST_CASE("tendon strain and relaxed energy") {
  CHECK(tendon_strain(100.0, 100.0) == doctest::Approx(0.0));
  CHECK(tendon_strain(101.0, 100.0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(tendon_strain(98.0, 100.0) == doctest::Approx(-0.02).epsilon(1e-14));
  CHECK_THROWS_AS(tendon_strain(1.0, 0.0), ConfigError);

  CHECK(tendon_energy_relaxed(-0.01, 1.0, 100.0) == 0.0);
  CHECK(tendon_energy_relaxed(0.01, 1.0, 100.0) == doctest::Approx(0.005));

  // continuity and differentiability at eps = 0
  const double h = 1e-9;
  CHECK(tendon_energy_relaxed(h, 1.0, 100.0) < 1e-14);
  const double dplus = (tendon_energy_relaxed(h, 1.0, 100.0) - 0.0) / h;
  const double dminus = (0.0 - tendon_energy_relaxed(-h, 1.0, 100.0)) / h;
  CHECK(std::abs(dplus) < 1e-6);
  CHECK(std::abs(dminus) < 1e-6);
}

TEST_CASE("assemble: empty set, single tendon row, duplicate rejection") {
  RefMesh mesh = line_mesh(5);
  DeformationState st;
  for (int i = 0; i < 5; ++i) st.positions.push_back(Vec3(0, 0, 1.1 * i));

  ConstraintSet empty;
  CHECK(assemble_constraints(st, mesh, empty).empty());

  ConstraintSet one;
  TendonSpec t;
  t.seam = 0;
  t.length = 4.0;
  one.tendons.push_back(t);
  const auto rows = assemble_constraints(st, mesh, one);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].value == doctest::Approx((4.4 - 4.0) / 4.0));
  CHECK(!rows[0].is_equality);

  ConstraintSet dup = one;
  dup.tendons.push_back(t);
  CHECK_THROWS_AS(assemble_constraints(st, mesh, dup), ConfigError);

  ConstraintSet badseam;
  TendonSpec tb;
  tb.seam = 3;
  tb.length = 1.0;
  badseam.tendons.push_back(tb);
  CHECK_THROWS_AS(assemble_constraints(st, mesh, badseam), ConfigError);
}

TEST_CASE("constraint senses and forms") {
  RefMesh mesh = line_mesh(3);
  DeformationState st;
  st.positions = {Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 0, 2.1)};
  const double len = 2.1, Lt = 2.0;
  const double eps = (len - Lt) / Lt;

  auto value_of = [&](TendonSense sense, TendonForm form) {
    ConstraintSet cs;
    TendonSpec t;
    t.seam = 0;
    t.length = Lt;
    t.sense = sense;
    t.form = form;
    cs.tendons.push_back(t);
    return assemble_constraints(st, mesh, cs)[0];
  };
  CHECK(value_of(TendonSense::LessEqual, TendonForm::Strain).value ==
        doctest::Approx(eps));
  CHECK(value_of(TendonSense::GreaterEqual, TendonForm::Strain).value ==
        doctest::Approx(-eps));
  CHECK(value_of(TendonSense::Equal, TendonForm::Strain).is_equality);
  CHECK(value_of(TendonSense::LessEqual, TendonForm::Energy).value ==
        doctest::Approx(0.5 * eps * eps * Lt));
}

TEST_CASE("tendon jacobian matches finite differences, including the slack side") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RefMesh mesh = line_mesh(6);

  for (TendonForm form : {TendonForm::Strain, TendonForm::Energy}) {
    for (double Lt : {4.0, 8.0}) {  // taut and slack cases
      DeformationState st;
      for (int i = 0; i < 6; ++i)
        st.positions.push_back(Vec3(0.3 * u(rng), 0.3 * u(rng), i + 0.3 * u(rng)));
      ConstraintSet cs;
      TendonSpec t;
      t.seam = 0;
      t.length = Lt;
      t.form = form;
      cs.tendons.push_back(t);
      const auto row = assemble_constraints(st, mesh, cs)[0];
      std::vector<Vec3> jac(6, Vec3::Zero());
      for (const auto& [nid, g] : row.jacobian) jac[size_t(nid)] = g;
      double worst = 0.0;
      const double h = 1e-7;
      for (int n = 0; n < 6; ++n)
        for (int c = 0; c < 3; ++c) {
          DeformationState sp = st, sm = st;
          sp.positions[size_t(n)][c] += h;
          sm.positions[size_t(n)][c] -= h;
          const double fd = (assemble_constraints(sp, mesh, cs)[0].value -
                             assemble_constraints(sm, mesh, cs)[0].value) /
                            (2.0 * h);
          worst = std::max(worst, std::abs(fd - jac[size_t(n)][c]) /
                                      (std::abs(jac[size_t(n)][c]) + 1e-9));
        }
      CHECK(worst < 1e-6);
    }
  }
}

TEST_CASE("volume constraint row with multiplicity") {
  RefMesh mesh = line_mesh(3);
  mesh.multiplicity = 8.0;
  Facet f;
  f.nodes = {0, 1, 2};
  f.ref_area = 0.5;
  f.ref_edge_inv = Mat2::Identity();
  mesh.facets.push_back(f);
  DeformationState st;
  st.positions = {Vec3(1, 0, 1), Vec3(0, 1, 1), Vec3(0, 0, 2)};

  ConstraintSet cs;
  cs.volume_target = 5.0;
  const auto rows = assemble_constraints(st, mesh, cs);
  REQUIRE(rows.size() == 1);
  const double v = facet_volume_contribution(st.positions[0], st.positions[1],
                                             st.positions[2]);
  CHECK(rows[0].value == doctest::Approx(8.0 * v - 5.0).epsilon(1e-13));
  CHECK(rows[0].is_equality);
}

TEST_CASE("constraint values are invariant under rotations about the z-axis") {
  RefMesh mesh = line_mesh(5);
  Facet f;
  f.nodes = {0, 1, 2};
  f.ref_area = 0.5;
  f.ref_edge_inv = Mat2::Identity();
  mesh.facets.push_back(f);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DeformationState st;
  for (int i = 0; i < 5; ++i)
    st.positions.push_back(Vec3(u(rng), u(rng), i + u(rng)));

  ConstraintSet cs;
  TendonSpec t;
  t.seam = 0;
  t.length = 4.0;
  cs.tendons.push_back(t);
  cs.volume_target = 1.0;
  const auto base = assemble_constraints(st, mesh, cs);

  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double a = kPi * u(rng);
    DeformationState rot = st;
    for (auto& p : rot.positions)
      p = Vec3(std::cos(a) * p.x() - std::sin(a) * p.y(),
               std::sin(a) * p.x() + std::cos(a) * p.y(), p.z());
    const auto rows = assemble_constraints(rot, mesh, cs);
    for (size_t r = 0; r < rows.size(); ++r)
      worst = std::max(worst, std::abs(rows[r].value - base[size_t(r)].value));
  }
  CHECK(worst < 1e-12 * 10.0);
}
