#pragma once

#include <array>
#include <optional>
#include <vector>

#include "aerostat/shape_finding.hpp"
#include "aerostat/types.hpp"

namespace aerostat {

enum class DofKind { Free, Fixed, Plane, Axis };

struct NodeConstraint {
  DofKind kind = DofKind::Free;
  Vec3 plane_normal = Vec3::Zero();  // Plane only; plane passes through the origin
};

struct Facet {
  std::array<int, 3> nodes;
  Mat2 ref_edge_inv;  // inverse of [P1-P0 | P2-P0] in the facet's own chart
  double ref_area = 0.0;
  int strip = -1;
  Vec2 centroid_uv = Vec2::Zero();
};

enum class SymmetryMode { None, HalfGore, Lobe, Full };

struct SymmetrySpec {
  SymmetryMode mode = SymmetryMode::HalfGore;
  int n_gores = 0;  // N
  int lobes = 0;    // q, Lobe mode only; must divide N
};

/// Triangulated flat reference domain. Nodes carry (u,v) chart coordinates;
/// facets keep their own reference edge matrices so stitched meshes stay valid
/// where seam charts disagree.
struct RefMesh {
  std::vector<Vec2> nodes_uv;
  std::vector<Facet> facets;
  std::vector<NodeConstraint> dofs;

  std::vector<std::vector<int>> seams;  // node lists per seam, ordered by increasing v
  std::vector<int> centerline_nodes;    // ordered by increasing v
  std::vector<int> base_nodes;          // on Gamma (v = 0)
  int apex_node = -1;                   // -1 when the pattern does not close

  int strips = 0;
  int tris_per_strip = 0;
  SymmetryMode mode = SymmetryMode::None;
  int n_gores = 0;
  int lobes = 0;
  double multiplicity = 1.0;   // fundamental domain -> full balloon factor
  double gore_spacing = 0.0;   // Delta

  // chart metadata for lifting stitched meshes: gore index and mirror flag
  std::vector<int> node_gore;
  std::vector<bool> node_mirrored;

  double total_ref_area() const;
};

/// Triangulate the half gore {0 <= u <= h(v), 0 <= v <= L_c} into `strips`
/// meridional strips with tris_per_strip facets each, ordered top-to-bottom
/// within a strip so the postprocess pairing is index-adjacent. When the
/// pattern closes to a point at the top the top interval becomes a single
/// apex fan triangle and the bottom interval is split into three via a
/// midpoint node on Gamma, keeping tris_per_strip even and the mesh conforming.
RefMesh triangulate_half_gore(const GorePattern& pattern, int strips,
                              int tris_per_strip);

/// Assign DOF constraints (and stitch gores for Lobe/Full modes):
///  - HalfGore(N): centerline nodes y=0 plane, seam nodes y=tan(pi/N)x plane,
///    base fixed, apex on the z-axis; multiplicity 2N.
///  - Lobe(q): half-lobe fundamental region, seam plane tan(pi/q); 2q.
///  - Full: N stitched gores, only Gamma fixed and apex conditions; 1.
///  - None: only Gamma fixed (and apex on axis when present); testing aid.
/// Re-applying the same mode is idempotent.
RefMesh apply_symmetry(const RefMesh& mesh, const SymmetrySpec& spec);

/// Nodal positions of one configuration S = x(Omega).
struct DeformationState {
  enum class Tag { InitialGuess, Iterate, Converged };
  std::vector<Vec3> positions;
  Tag tag = Tag::InitialGuess;
};

/// Per-facet 3x2 deformation gradient F = [x1-x0 | x2-x0] * ref_edge_inv.
Mat32 deformation_gradient(const Facet& facet, const DeformationState& state);

/// Reduced coordinates over the admissible manifold. Plane nodes carry 2 DOFs
/// in an in-plane basis, axis nodes 1 (z), fixed nodes 0; all constraint
/// planes pass through the origin so reconstructed positions satisfy them to
/// machine precision.
class DofMap {
 public:
  static DofMap build(const RefMesh& mesh, const DeformationState& x0);

  int size() const { return n_dofs_; }
  VecX pack(const DeformationState& state) const;       // project + extract
  void unpack(const VecX& q, DeformationState* state) const;
  VecX reduce(const std::vector<Vec3>& nodal_grad) const;
  /// Scatter a reduced direction back to nodal 3-vectors (for audits).
  std::vector<Vec3> spread(const VecX& dq) const;

  DofKind kind(int node) const { return entries_[node].kind; }

 private:
  struct Entry {
    DofKind kind;
    int offset;
    Vec3 e1, e2;  // in-plane basis (Plane) or e1 = k (Axis)
    Vec3 base;    // fixed position (Fixed), zero otherwise
  };
  std::vector<Entry> entries_;
  int n_dofs_ = 0;
};

/// Map reference nodes onto the shape-finding surface and project the result
/// onto the admissibility constraints. Throws on parameter-range violations.
DeformationState lift_initial_guess(const RefMesh& mesh, const GoreSurface3D& gore);

}  // namespace aerostat
