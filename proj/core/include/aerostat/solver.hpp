#pragma once

#include <cstdint>
#include <vector>

#include "aerostat/constitutive.hpp"
#include "aerostat/constraints.hpp"
#include "aerostat/gore_mesh.hpp"
#include "aerostat/loads.hpp"
#include "aerostat/material.hpp"

namespace aerostat {

struct SolveConfig {
  int outer_iterations = 40;
  double penalty_growth = 10.0;       // > 1
  double penalty_initial = 10.0;      // nondimensional
  enum class Inner { QuasiNewton, ProjectedNewton } inner = Inner::QuasiNewton;
  double grad_tol = 1e-6;        // nondimensional KKT gradient norm
  double constraint_tol = 1e-8;  // nondimensional feasibility
  int max_inner_iterations = 20000;
  int lbfgs_memory = 20;
  double length_scale = 0.0;  // characteristic length; 0 = auto from the state
  std::uint64_t seed = 0;     // recorded for reproducibility; solver is deterministic

  void validate() const {
    if (!(grad_tol > 0.0) || !(constraint_tol > 0.0))
      throw ConfigError("solver: tolerances must be > 0");
    if (!(penalty_growth > 1.0))
      throw ConfigError("solver: penalty growth must be > 1");
    if (outer_iterations < 1 || max_inner_iterations < 1)
      throw ConfigError("solver: iteration limits must be >= 1");
  }
};

struct IterationRecord {
  int outer = 0;
  int inner_iterations = 0;
  double energy = 0.0;         // physical total energy [J]
  double grad_norm = 0.0;      // nondimensional KKT gradient norm
  double max_violation = 0.0;  // nondimensional constraint violation
};

struct Multipliers {
  double volume = 0.0;                 // lambda_V [Pa]; equilibrium p0 term
  std::vector<double> tendons;         // per-tendon lambda [J per unit strain]
  std::vector<double> tendon_tension;  // lambda / L_t [N]
};

struct EnergyBreakdown {
  double total = 0.0;     // full balloon [J]
  double film = 0.0;      // [J]
  double pressure = 0.0;  // [J]
  std::vector<Vec3> nodal_gradient;
};

/// Relaxed total energy E_T* = mult * sum_facets (A_ref W*(F) + E_P,facet)
/// with its analytic nodal gradient. Throws NumericalError (with facet id) on
/// non-finite contributions.
EnergyBreakdown total_energy(const DeformationState& state, const RefMesh& mesh,
                             const MaterialProps& mat, const LoadSpec& loads);

/// Full-balloon enclosed volume (fundamental-domain sum times multiplicity).
double enclosed_volume(const DeformationState& state, const RefMesh& mesh);

struct Problem {
  const RefMesh* mesh = nullptr;
  MaterialProps material;
  LoadSpec loads;
  ConstraintSet constraints;
};

struct SolveResult {
  DeformationState state;
  double total_energy = 0.0;
  double film_energy = 0.0;
  double pressure_potential = 0.0;
  double volume = 0.0;
  Multipliers multipliers;
  std::vector<IterationRecord> log;
  bool converged = false;
  double kkt_residual = 0.0;
  double max_constraint_violation = 0.0;  // nondimensional
  std::vector<double> tendon_strains;     // converged eps per tendon
  std::vector<FacetResponse> facets;
  int self_intersections = 0;
  int inner_iterations_total = 0;
};

/// Minimize the relaxed total energy over the admissible manifold subject to
/// the constraint set: augmented Lagrangian outer loop, quasi-Newton (L-BFGS)
/// or projected-Newton inner solver. ProjectedNewton requires an empty
/// constraint set (the linear admissibility constraints are eliminated by the
/// DOF map). Deterministic: identical configs produce identical logs.
SolveResult minimize(const Problem& problem, const DeformationState& init,
                     const SolveConfig& cfg);

/// Max relative disagreement between the analytic reduced gradient of the
/// total energy and central finite differences, over min(n, max_dofs) DOFs.
double finite_difference_audit(const Problem& problem, const DeformationState& state,
                               double step, int max_dofs = 150);

/// Same audit for the volume and each constraint row.
double finite_difference_audit_constraints(const Problem& problem,
                                           const DeformationState& state, double step,
                                           int max_dofs = 150);

/// Count intersecting non-adjacent facet pairs (post-hoc audit only).
int self_intersection_count(const DeformationState& state, const RefMesh& mesh);

}  // namespace aerostat
