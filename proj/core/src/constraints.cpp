#include "aerostat/constraints.hpp"

#include <cmath>
#include <set>

#include "aerostat/loads.hpp"

namespace aerostat {

void ConstraintSet::validate(const RefMesh& mesh) const {
  std::set<int> seen;
  for (const auto& t : tendons) {
    if (t.seam < 0 || t.seam >= int(mesh.seams.size()))
      throw ConfigError("constraints: tendon references a nonexistent seam");
    if (!seen.insert(t.seam).second)
      throw ConfigError("constraints: duplicate tendon constraint on one seam");
    if (!(t.length > 0.0)) throw ConfigError("constraints: tendon length must be > 0");
    if (!(t.stiffness > 0.0))
      throw ConfigError("constraints: tendon stiffness must be > 0");
    if (mesh.seams[size_t(t.seam)].size() < 2)
      throw ConfigError("constraints: seam has fewer than 2 nodes");
  }
  if (volume_target && !(*volume_target > 0.0))
    throw ConfigError("constraints: volume target must be > 0");
}

double tendon_length(const DeformationState& state, const std::vector<int>& seam) {
  std::vector<double> segs;
  segs.reserve(seam.size());
  for (size_t i = 1; i < seam.size(); ++i)
    segs.push_back(
        (state.positions[size_t(seam[i])] - state.positions[size_t(seam[i - 1])]).norm());
  return pairwise_sum(segs);
}

double tendon_strain(double length, double L_t) {
  if (!(L_t > 0.0)) throw ConfigError("tendon_strain: L_t must be > 0");
  return (length - L_t) / L_t;
}

double tendon_energy_relaxed(double eps, double K, double L_t) {
  return eps > 0.0 ? 0.5 * K * eps * eps * L_t : 0.0;
}

void tendon_length_gradient(const DeformationState& state, const std::vector<int>& seam,
                            double weight, std::vector<Vec3>* nodal) {
  for (size_t i = 1; i < seam.size(); ++i) {
    const Vec3 d = state.positions[size_t(seam[i])] - state.positions[size_t(seam[i - 1])];
    const double n = d.norm();
    if (n < 1e-300) continue;
    const Vec3 t = d / n;
    (*nodal)[size_t(seam[i])] += weight * t;
    (*nodal)[size_t(seam[i - 1])] -= weight * t;
  }
}

std::vector<ConstraintRow> assemble_constraints(const DeformationState& state,
                                                const RefMesh& mesh,
                                                const ConstraintSet& set) {
  set.validate(mesh);
  std::vector<ConstraintRow> rows;

  for (size_t ti = 0; ti < set.tendons.size(); ++ti) {
    const TendonSpec& t = set.tendons[ti];
    const auto& seam = mesh.seams[size_t(t.seam)];
    const double len = tendon_length(state, seam);
    const double eps = tendon_strain(len, t.length);

    ConstraintRow row;
    row.tendon_index = int(ti);
    row.is_equality = (t.sense == TendonSense::Equal);
    const double sign = (t.sense == TendonSense::GreaterEqual) ? -1.0 : 1.0;

    double dval_dlen = 0.0;
    if (t.form == TendonForm::Strain) {
      row.value = sign * eps;
      dval_dlen = sign / t.length;
    } else {
      row.value = sign * tendon_energy_relaxed(eps, t.stiffness, t.length);
      dval_dlen = (eps > 0.0) ? sign * t.stiffness * eps : 0.0;
    }

    std::vector<Vec3> nodal(state.positions.size(), Vec3::Zero());
    tendon_length_gradient(state, seam, dval_dlen, &nodal);
    for (int nid : seam)
      if (nodal[size_t(nid)].squaredNorm() > 0.0)
        row.jacobian.emplace_back(nid, nodal[size_t(nid)]);
    rows.push_back(std::move(row));
  }

  if (set.volume_target) {
    ConstraintRow row;
    row.is_equality = true;
    const double mult = mesh.multiplicity;
    std::vector<double> contrib(mesh.facets.size());
    std::vector<Vec3> nodal(state.positions.size(), Vec3::Zero());
    for (size_t f = 0; f < mesh.facets.size(); ++f) {
      const auto& fc = mesh.facets[f];
      const Vec3& a = state.positions[size_t(fc.nodes[0])];
      const Vec3& b = state.positions[size_t(fc.nodes[1])];
      const Vec3& c = state.positions[size_t(fc.nodes[2])];
      contrib[f] = facet_volume_contribution(a, b, c);
      accumulate_volume_gradient(a, b, c, mult, &nodal[size_t(fc.nodes[0])],
                                 &nodal[size_t(fc.nodes[1])], &nodal[size_t(fc.nodes[2])]);
    }
    row.value = mult * pairwise_sum(contrib) - *set.volume_target;
    for (size_t n = 0; n < nodal.size(); ++n)
      if (nodal[n].squaredNorm() > 0.0) row.jacobian.emplace_back(int(n), nodal[n]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace aerostat
