#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "aerostat/scenario.hpp"
#include "aerostat/solver.hpp"

using namespace aerostat;

namespace {

GorePattern rectangle_pattern(double h, double Lc) {
  GorePattern p;
  p.mode = GoreMode::Zpns;
  p.v = {0.0, Lc};
  p.h = {h, h};
  p.L_c = Lc;
  p.L_s = Lc;
  p.L_t = Lc;
  p.L_d = Lc;
  p.n_gores = 12;
  return p;
}

struct CoarsePumpkin {
  RunConfig cfg;
  ShapefindOutput shape;
  RefMesh mesh;
  DeformationState init;
};

const CoarsePumpkin& coarse_pumpkin() {
  static const CoarsePumpkin fx = [] {
    CoarsePumpkin f;
    f.cfg = table1_pumpkin_config();
    f.cfg.strips = 2;
    f.cfg.tris_per_strip = 16;
    f.shape = run_shapefind(f.cfg);
    RefMesh base = triangulate_half_gore(f.shape.pattern, f.cfg.strips,
                                         f.cfg.tris_per_strip);
    SymmetrySpec sym;
    sym.mode = SymmetryMode::HalfGore;
    sym.n_gores = f.cfg.design.n_gores;
    f.mesh = apply_symmetry(base, sym);
    f.init = lift_initial_guess(f.mesh, f.shape.gore);
    return f;
  }();
  return fx;
}

DeformationState perturbed(const DeformationState& st, double amp, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DeformationState out = st;
  for (auto& p : out.positions) p += amp * Vec3(u(rng), u(rng), u(rng));
  return out;
}

}  // namespace

TEST_CASE("unstrained unloaded flat gore has zero energy and gradient") {
  const RefMesh base = triangulate_half_gore(rectangle_pattern(0.5, 2.0), 2, 4);
  SymmetrySpec none;
  none.mode = SymmetryMode::None;
  none.n_gores = 12;
  const RefMesh mesh = apply_symmetry(base, none);
  DeformationState st;
  st.positions.resize(mesh.nodes_uv.size());
  for (size_t i = 0; i < mesh.nodes_uv.size(); ++i)
    st.positions[i] = Vec3(mesh.nodes_uv[i].x(), mesh.nodes_uv[i].y(), 0.0);

  MaterialProps mat;
  mat.thickness = 32e-6;
  mat.youngs = 404.2e6;
  mat.poisson = 0.825;
  LoadSpec loads;
  loads.buoyancy = 1e-300;  // b = 0 limit; validation requires positive
  loads.constant_pressure = 0.0;

  const EnergyBreakdown b = total_energy(st, mesh, mat, loads);
  CHECK(b.total == doctest::Approx(0.0).epsilon(1e-20));
  double gmax = 0.0;
  for (const auto& g : b.nodal_gradient) gmax = std::max(gmax, g.norm());
  CHECK(gmax < 1e-12);
}

TEST_CASE("energy decreases along the negative gradient direction") {
  const auto& fx = coarse_pumpkin();
  const DofMap dm = DofMap::build(fx.mesh, fx.init);
  DeformationState st = perturbed(fx.init, 0.01, 7);
  dm.unpack(dm.pack(st), &st);  // keep admissible

  const EnergyBreakdown b = total_energy(st, fx.mesh, fx.cfg.material, fx.cfg.loads);
  const VecX g = dm.reduce(b.nodal_gradient);
  REQUIRE(g.norm() > 0.0);
  VecX q = dm.pack(st);
  double prev = b.total;
  for (double step : {1e-8, 1e-7, 1e-6}) {
    DeformationState st2;
    dm.unpack(q - step * g / g.norm() * q.norm(), &st2);
    const double E2 = total_energy(st2, fx.mesh, fx.cfg.material, fx.cfg.loads).total;
    CHECK(E2 < prev);
  }
}

TEST_CASE("finite-difference audit of the full-system gradient") {
  const auto& fx = coarse_pumpkin();
  Problem prob;
  prob.mesh = &fx.mesh;
  prob.material = fx.cfg.material;
  prob.loads = fx.cfg.loads;

  // lifted pumpkin state (mixed regions)
  const double err = finite_difference_audit(prob, fx.init, 1e-6);
  CHECK(err < 1e-6);

  // random admissible perturbations
  for (unsigned seed : {11u, 12u, 13u}) {
    const DofMap dm = DofMap::build(fx.mesh, fx.init);
    DeformationState st = perturbed(fx.init, 5e-3, seed);
    dm.unpack(dm.pack(st), &st);
    CHECK(finite_difference_audit(prob, st, 1e-6) < 2e-6);
  }

  // constraint jacobians
  prob.constraints.volume_target = enclosed_volume(fx.init, fx.mesh);
  TendonSpec t;
  t.seam = 0;
  t.length = fx.shape.pattern.L_t;
  prob.constraints.tendons.push_back(t);
  CHECK(finite_difference_audit_constraints(prob, fx.init, 1e-6) < 1e-6);
}

TEST_CASE("finite-difference audit: step sweep has an interior optimum") {
  const auto& fx = coarse_pumpkin();
  Problem prob;
  prob.mesh = &fx.mesh;
  prob.material = fx.cfg.material;
  prob.loads = fx.cfg.loads;

  std::vector<double> errs;
  for (double step : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8})
    errs.push_back(finite_difference_audit(prob, fx.init, step, 40));
  const double emin = *std::min_element(errs.begin(), errs.end());
  // classic V-shape: both extremes are worse than the best interior step
  CHECK(emin < errs.front());
  CHECK(emin < errs.back());
}

TEST_CASE("minimize: coarse pumpkin with tendon converges and is deterministic") {
  const auto& fx = coarse_pumpkin();
  Problem prob;
  prob.mesh = &fx.mesh;
  prob.material = fx.cfg.material;
  prob.loads = fx.cfg.loads;
  TendonSpec t;
  t.seam = 0;
  t.length = fx.shape.pattern.L_t;
  prob.constraints.tendons.push_back(t);

  SolveConfig cfg;
  cfg.max_inner_iterations = 6000;
  const SolveResult a = minimize(prob, fx.init, cfg);
  CHECK(a.converged);
  CHECK(a.max_constraint_violation <= cfg.constraint_tol);
  CHECK(a.kkt_residual <= 10.0 * cfg.grad_tol);
  REQUIRE(a.tendon_strains.size() == 1);
  CHECK(a.tendon_strains[0] <= 1e-8);
  CHECK(a.state.tag == DeformationState::Tag::Converged);
  // relaxed resultants stay nonnegative on every facet
  for (const auto& fr : a.facets) {
    CHECK(fr.mu1 >= 0.0);
    CHECK(fr.mu2 >= 0.0);
  }

  // bit-identical rerun
  const SolveResult b = minimize(prob, fx.init, cfg);
  REQUIRE(a.log.size() == b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].energy == b.log[i].energy);
    CHECK(a.log[i].grad_norm == b.log[i].grad_norm);
    CHECK(a.log[i].inner_iterations == b.log[i].inner_iterations);
  }
  CHECK(a.total_energy == b.total_energy);
}

TEST_CASE("projected-Newton path matches quasi-Newton on an unconstrained solve") {
  const auto& fx = coarse_pumpkin();
  Problem prob;
  prob.mesh = &fx.mesh;
  prob.material = fx.cfg.material;
  prob.loads = fx.cfg.loads;

  SolveConfig qn;
  qn.max_inner_iterations = 20000;
  const SolveResult a = minimize(prob, fx.init, qn);

  SolveConfig pn;
  pn.inner = SolveConfig::Inner::ProjectedNewton;
  pn.max_inner_iterations = 400;
  const SolveResult b = minimize(prob, fx.init, pn);

  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(b.total_energy ==
        doctest::Approx(a.total_energy).epsilon(1e-6));
  CHECK(b.inner_iterations_total < a.inner_iterations_total);

  // Newton path refuses nonlinear constraints
  Problem c = prob;
  c.constraints.volume_target = 1000.0;
  CHECK_THROWS_AS(minimize(c, fx.init, pn), ConfigError);
}

TEST_CASE("closed-system volume feasibility and multiplier sign") {
  const auto& fx = coarse_pumpkin();
  Problem prob;
  prob.mesh = &fx.mesh;
  prob.material = fx.cfg.material;
  prob.loads = fx.cfg.loads;
  prob.loads.constant_pressure = 0.0;  // closed system assumes -P = b z
  const double v0 = enclosed_volume(fx.init, fx.mesh);
  prob.constraints.volume_target = 1.0005 * v0;

  SolveConfig cfg;
  cfg.max_inner_iterations = 8000;
  cfg.constraint_tol = 1e-10;
  const SolveResult res = minimize(prob, fx.init, cfg);
  CHECK(res.converged);
  CHECK(std::abs(res.volume - *prob.constraints.volume_target) <
        1e-9 * fx.mesh.multiplicity * 1e5);
  // inflating beyond the natural volume needs positive pressure
  CHECK(res.multipliers.volume > 0.0);
}

TEST_CASE("iteration log energies are non-increasing for the unconstrained path") {
  const auto& fx = coarse_pumpkin();
  Problem prob;
  prob.mesh = &fx.mesh;
  prob.material = fx.cfg.material;
  prob.loads = fx.cfg.loads;
  SolveConfig cfg;
  cfg.max_inner_iterations = 20000;
  const SolveResult res = minimize(prob, fx.init, cfg);
  const double E0 = total_energy(fx.init, fx.mesh, prob.material, prob.loads).total;
  CHECK(res.total_energy <= E0);
}

TEST_CASE("self-intersection audit flags a crossing pair") {
  RefMesh mesh;
  mesh.nodes_uv.assign(6, Vec2::Zero());
  mesh.dofs.assign(6, NodeConstraint{});
  Facet f1;
  f1.nodes = {0, 1, 2};
  f1.ref_area = 1.0;
  f1.ref_edge_inv = Mat2::Identity();
  Facet f2 = f1;
  f2.nodes = {3, 4, 5};
  mesh.facets = {f1, f2};
  mesh.multiplicity = 1.0;

  DeformationState crossing;
  crossing.positions = {Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(0, 2, 0),
                        Vec3(0, 0, -1),  Vec3(0.2, 0, 1), Vec3(-0.2, 0.3, 1)};
  CHECK(self_intersection_count(crossing, mesh) == 1);

  DeformationState apart = crossing;
  for (int i = 3; i < 6; ++i) apart.positions[size_t(i)] += Vec3(0, 0, 5);
  CHECK(self_intersection_count(apart, mesh) == 0);
}

TEST_CASE("non-finite states are reported with the facet id") {
  const auto& fx = coarse_pumpkin();
  DeformationState bad = fx.init;
  bad.positions[3] = Vec3(std::nan(""), 0, 0);
  CHECK_THROWS_AS(total_energy(bad, fx.mesh, fx.cfg.material, fx.cfg.loads),
                  NumericalError);
}
