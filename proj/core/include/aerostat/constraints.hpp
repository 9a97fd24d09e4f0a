#pragma once

#include <optional>
#include <vector>

#include "aerostat/gore_mesh.hpp"
#include "aerostat/types.hpp"

namespace aerostat {

enum class TendonSense { LessEqual, Equal, GreaterEqual };

/// How the tendon condition is expressed to the optimizer. The strain form
/// (eps <= 0) and the relaxed-energy form (S*_t <= 0) describe the same
/// feasible set; the energy form has a vanishing gradient at eps -> 0+ and is
/// kept for fidelity experiments.
enum class TendonForm { Strain, Energy };

struct TendonSpec {
  int seam = 0;           // index into RefMesh::seams
  double length = 0.0;    // L_t [m]
  double stiffness = 1.0; // K [N]; energy form only
  TendonSense sense = TendonSense::LessEqual;
  TendonForm form = TendonForm::Strain;
};

struct ConstraintSet {
  std::vector<TendonSpec> tendons;
  std::optional<double> volume_target;  // omega_0 [m^3], full balloon

  bool empty() const { return tendons.empty() && !volume_target; }
  void validate(const RefMesh& mesh) const;
};

/// Polyline length of a deformed seam.
double tendon_length(const DeformationState& state, const std::vector<int>& seam);

/// eps = (L[Sigma] - L_t) / L_t.
double tendon_strain(double length, double L_t);

/// Relaxed tendon strain energy, K eps^2 L_t / 2 for eps > 0, else 0.
double tendon_energy_relaxed(double eps, double K, double L_t);

/// d(length)/d(node) for each seam node, accumulated (scaled by weight).
void tendon_length_gradient(const DeformationState& state, const std::vector<int>& seam,
                            double weight, std::vector<Vec3>* nodal);

/// One assembled constraint row: value and sparse nodal jacobian.
struct ConstraintRow {
  double value = 0.0;
  std::vector<std::pair<int, Vec3>> jacobian;  // (node, d value / d x_node)
  bool is_equality = false;
  int tendon_index = -1;  // -1 for the volume row
};

/// Assemble g <= 0 / h = 0 rows with analytic jacobians. Tendon senses map to
///   <=  :  c = eps (or S*_t)      <= 0
///   >=  :  c = -eps (or -S*_t)    <= 0
///   =   :  c = eps (or S*_t)       = 0
/// The volume row is V_full(x) - omega_0 = 0 with V_full including the
/// symmetry multiplicity.
std::vector<ConstraintRow> assemble_constraints(const DeformationState& state,
                                                const RefMesh& mesh,
                                                const ConstraintSet& set);

}  // namespace aerostat
