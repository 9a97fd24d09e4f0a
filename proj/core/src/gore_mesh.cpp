#include "aerostat/gore_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace aerostat {

namespace {

struct FacetBuilder {
  std::array<int, 3> nodes;
  std::array<Vec2, 3> uv;
  int strip;
};

Facet finish_facet(const FacetBuilder& fb) {
  Facet f;
  f.nodes = fb.nodes;
  f.strip = fb.strip;
  Mat2 E;
  E.col(0) = fb.uv[1] - fb.uv[0];
  E.col(1) = fb.uv[2] - fb.uv[0];
  const double det = E.determinant();
  if (!(det > 0.0))
    throw GeometryError("triangulate: degenerate or inverted reference facet (det = " +
                        std::to_string(det) + ")");
  f.ref_area = 0.5 * det;
  f.ref_edge_inv = E.inverse();
  f.centroid_uv = (fb.uv[0] + fb.uv[1] + fb.uv[2]) / 3.0;
  return f;
}

Vec3 rotate_z(const Vec3& p, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return Vec3(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z());
}

}  // namespace

double RefMesh::total_ref_area() const {
  std::vector<double> a(facets.size());
  for (size_t i = 0; i < facets.size(); ++i) a[i] = facets[i].ref_area;
  return pairwise_sum(a);
}

RefMesh triangulate_half_gore(const GorePattern& pattern, int strips,
                              int tris_per_strip) {
  if (strips < 1) throw ConfigError("mesh.strips must be >= 1");
  if (tris_per_strip < 2 || tris_per_strip % 2 != 0)
    throw ConfigError("mesh.tris_per_strip must be even and >= 2");
  const int M = tris_per_strip / 2;  // v-intervals per strip

  const double L_c = pattern.L_c;
  double h_max = 0.0;
  for (double hv : pattern.h) h_max = std::max(h_max, hv);
  if (!(h_max > 0.0)) throw GeometryError("triangulate: empty pattern");

  std::vector<double> vr(M + 1), hr(M + 1);
  for (int i = 0; i <= M; ++i) {
    vr[i] = L_c * double(i) / double(M);
    hr[i] = pattern.half_width(vr[i]);
  }
  const bool collapse = hr[M] < 1e-9 * h_max;
  if (!(hr[0] > 0.0))
    throw GeometryError("triangulate: pattern width vanishes at the base edge");
  if (collapse && M < 2)
    throw GeometryError(
        "triangulate: closing pattern needs tris_per_strip >= 4 (apex fan)");
  const int top_row = collapse ? M - 1 : M;

  RefMesh mesh;
  // grid nodes
  std::vector<std::vector<int>> grid(top_row + 1, std::vector<int>(strips + 1));
  for (int i = 0; i <= top_row; ++i)
    for (int j = 0; j <= strips; ++j) {
      grid[i][j] = int(mesh.nodes_uv.size());
      mesh.nodes_uv.emplace_back(hr[i] * double(j) / double(strips), vr[i]);
    }
  int apex = -1;
  std::vector<int> mids(strips, -1);
  if (collapse) {
    apex = int(mesh.nodes_uv.size());
    mesh.nodes_uv.emplace_back(0.0, L_c);
    for (int j = 0; j < strips; ++j) {
      mids[j] = int(mesh.nodes_uv.size());
      const double um = hr[0] * (double(j) + 0.5) / double(strips);
      mesh.nodes_uv.emplace_back(um, 0.0);
    }
  }

  auto uv = [&](int nid) { return mesh.nodes_uv[size_t(nid)]; };
  auto quad_pair = [&](std::vector<FacetBuilder>& out, int i, int j) {
    // interval i (rows i -> i+1), strip j; alternating diagonals
    const int BL = grid[i][j], BR = grid[i][j + 1];
    const int TL = grid[i + 1][j], TR = grid[i + 1][j + 1];
    if ((i + j) % 2 == 0) {
      out.push_back({{BL, TR, TL}, {uv(BL), uv(TR), uv(TL)}, j});
      out.push_back({{BL, BR, TR}, {uv(BL), uv(BR), uv(TR)}, j});
    } else {
      out.push_back({{BR, TR, TL}, {uv(BR), uv(TR), uv(TL)}, j});
      out.push_back({{BL, BR, TL}, {uv(BL), uv(BR), uv(TL)}, j});
    }
  };

  for (int j = 0; j < strips; ++j) {
    std::vector<FacetBuilder> fb;
    if (collapse) {
      fb.push_back({{grid[M - 1][j], grid[M - 1][j + 1], apex},
                    {uv(grid[M - 1][j]), uv(grid[M - 1][j + 1]), uv(apex)},
                    j});
      for (int i = M - 2; i >= 1; --i) quad_pair(fb, i, j);
      // bottom interval: three facets via the Gamma midpoint node
      const int BL = grid[0][j], BR = grid[0][j + 1];
      const int TL = grid[1][j], TR = grid[1][j + 1];
      const int D = mids[j];
      fb.push_back({{D, TR, TL}, {uv(D), uv(TR), uv(TL)}, j});
      fb.push_back({{BL, D, TL}, {uv(BL), uv(D), uv(TL)}, j});
      fb.push_back({{D, BR, TR}, {uv(D), uv(BR), uv(TR)}, j});
    } else {
      for (int i = M - 1; i >= 0; --i) quad_pair(fb, i, j);
    }
    if (int(fb.size()) != tris_per_strip)
      throw GeometryError("triangulate: internal facet count mismatch");
    for (const auto& b : fb) mesh.facets.push_back(finish_facet(b));
  }

  // node sets
  mesh.centerline_nodes.clear();
  for (int i = 0; i <= top_row; ++i) mesh.centerline_nodes.push_back(grid[i][0]);
  if (apex >= 0) mesh.centerline_nodes.push_back(apex);
  std::vector<int> seam;
  for (int i = 0; i <= top_row; ++i) seam.push_back(grid[i][strips]);
  if (apex >= 0) seam.push_back(apex);
  mesh.seams = {seam};
  for (int j = 0; j <= strips; ++j) mesh.base_nodes.push_back(grid[0][j]);
  for (int j = 0; j < strips; ++j)
    if (mids[j] >= 0) mesh.base_nodes.push_back(mids[j]);
  mesh.apex_node = apex;

  mesh.strips = strips;
  mesh.tris_per_strip = tris_per_strip;
  mesh.mode = SymmetryMode::None;
  mesh.n_gores = pattern.n_gores;
  mesh.gore_spacing = 2.0 * h_max;
  mesh.multiplicity = 1.0;
  mesh.dofs.assign(mesh.nodes_uv.size(), NodeConstraint{});
  mesh.node_gore.assign(mesh.nodes_uv.size(), 0);
  mesh.node_mirrored.assign(mesh.nodes_uv.size(), false);
  return mesh;
}

namespace {

void tag_dofs(RefMesh& mesh, const SymmetrySpec& spec) {
  mesh.dofs.assign(mesh.nodes_uv.size(), NodeConstraint{});
  auto set_plane = [&](int nid, const Vec3& n) {
    NodeConstraint& c = mesh.dofs[size_t(nid)];
    if (c.kind == DofKind::Plane && (c.plane_normal - n).norm() > 1e-12) {
      c.kind = DofKind::Axis;  // two distinct planes through the z-axis
    } else if (c.kind == DofKind::Free) {
      c.kind = DofKind::Plane;
      c.plane_normal = n;
    }
  };

  if (spec.mode == SymmetryMode::HalfGore) {
    const double phi = kPi / spec.n_gores;
    const Vec3 n_seam(-std::sin(phi), std::cos(phi), 0.0);
    for (int nid : mesh.centerline_nodes) set_plane(nid, Vec3::UnitY());
    for (int nid : mesh.seams.at(0)) set_plane(nid, n_seam);
  } else if (spec.mode == SymmetryMode::Lobe) {
    const double phi = kPi / spec.lobes;
    const Vec3 n_last(-std::sin(phi), std::cos(phi), 0.0);
    if (!mesh.centerline_nodes.empty())
      for (int nid : mesh.centerline_nodes) set_plane(nid, Vec3::UnitY());
    else
      for (int nid : mesh.seams.front()) set_plane(nid, Vec3::UnitY());
    for (int nid : mesh.seams.back()) set_plane(nid, n_last);
  }
  if (mesh.apex_node >= 0) mesh.dofs[size_t(mesh.apex_node)].kind = DofKind::Axis;
  for (int nid : mesh.base_nodes) mesh.dofs[size_t(nid)].kind = DofKind::Fixed;
}

// Chain `n_half` half-gore charts (alternating mirror parity), merging shared
// boundary columns; wraps around when `wrap` is set (full balloon).
RefMesh stitch_halves(const RefMesh& base, int n_half, bool start_mirrored, bool wrap) {
  const int strips = base.strips;
  // base columns: left = centerline (j=0), right = seam (j=strips)
  std::vector<std::vector<int>> base_cols(2);
  {
    // reconstruct grid columns from the recorded node sets
    std::vector<int> left = base.centerline_nodes;
    std::vector<int> right = base.seams.at(0);
    if (base.apex_node >= 0) {
      left.pop_back();
      right.pop_back();
    }
    base_cols[0] = left;
    base_cols[1] = right;
  }

  RefMesh out;
  out.strips = strips;
  out.tris_per_strip = base.tris_per_strip;
  out.n_gores = base.n_gores;
  out.gore_spacing = base.gore_spacing;

  const int n_nodes_base = int(base.nodes_uv.size());
  int apex_global = -1;
  if (base.apex_node >= 0) {
    apex_global = 0;
    out.nodes_uv.push_back(base.nodes_uv[size_t(base.apex_node)]);
    out.node_gore.push_back(0);
    out.node_mirrored.push_back(false);
  }

  std::vector<int> prev_right;  // global ids of the previous chart's right column
  std::vector<int> first_left;
  std::vector<std::vector<int>> seam_columns;

  for (int k = 0; k < n_half; ++k) {
    const bool mirrored = start_mirrored ? (k % 2 == 0) : (k % 2 == 1);
    // local left/right columns in base ids
    const auto& left_ids = mirrored ? base_cols[1] : base_cols[0];
    const auto& right_ids = mirrored ? base_cols[0] : base_cols[1];

    std::vector<int> map(n_nodes_base, -1);
    if (base.apex_node >= 0) map[size_t(base.apex_node)] = apex_global;
    const bool reuse_left = !prev_right.empty();
    if (reuse_left)
      for (size_t r = 0; r < left_ids.size(); ++r) map[size_t(left_ids[r])] = prev_right[r];
    const bool close_right = wrap && k == n_half - 1;
    if (close_right)
      for (size_t r = 0; r < right_ids.size(); ++r)
        map[size_t(right_ids[r])] = first_left[r];

    const int gore = start_mirrored ? (k + 1) / 2 : (k + 1) / 2;
    const double u_off = 0.5 * base.gore_spacing * double(k);
    for (int nid = 0; nid < n_nodes_base; ++nid) {
      if (map[size_t(nid)] >= 0) continue;
      map[size_t(nid)] = int(out.nodes_uv.size());
      Vec2 uv = base.nodes_uv[size_t(nid)];
      out.nodes_uv.emplace_back(uv);  // chart-local coordinates
      out.node_gore.push_back(gore % std::max(1, base.n_gores));
      out.node_mirrored.push_back(mirrored);
      // representative offset only used by exports; keep chart-local uv but
      // remember the chart through node_gore/node_mirrored
      (void)u_off;
    }
    if (!reuse_left) {
      first_left.resize(left_ids.size());
      for (size_t r = 0; r < left_ids.size(); ++r)
        first_left[r] = map[size_t(left_ids[r])];
    }
    prev_right.resize(right_ids.size());
    for (size_t r = 0; r < right_ids.size(); ++r)
      prev_right[r] = map[size_t(right_ids[r])];

    // seam columns (charts touch a physical seam on: right when unmirrored,
    // left when mirrored); record each once
    if (!mirrored) {
      std::vector<int> col = prev_right;
      if (apex_global >= 0) col.push_back(apex_global);
      seam_columns.push_back(col);
    }

    for (const Facet& f : base.facets) {
      FacetBuilder fb;
      for (int c = 0; c < 3; ++c) {
        fb.nodes[size_t(c)] = map[size_t(f.nodes[size_t(c)])];
        Vec2 uvc = base.nodes_uv[size_t(f.nodes[size_t(c)])];
        if (mirrored) uvc.x() = -uvc.x();
        fb.uv[size_t(c)] = uvc;
      }
      if (mirrored) {
        std::swap(fb.nodes[1], fb.nodes[2]);
        std::swap(fb.uv[1], fb.uv[2]);
      }
      fb.strip = k * strips + f.strip;
      out.facets.push_back(finish_facet(fb));
    }
    // base nodes of this chart
    for (int nid : base.base_nodes) out.base_nodes.push_back(map[size_t(nid)]);
  }
  std::sort(out.base_nodes.begin(), out.base_nodes.end());
  out.base_nodes.erase(std::unique(out.base_nodes.begin(), out.base_nodes.end()),
                       out.base_nodes.end());
  out.apex_node = apex_global;
  out.seams = seam_columns;
  if (!start_mirrored) {
    out.centerline_nodes = first_left;
    if (apex_global >= 0) out.centerline_nodes.push_back(apex_global);
  } else {
    // fundamental region starts at a seam; expose it as the first seam
    std::vector<int> col = first_left;
    if (apex_global >= 0) col.push_back(apex_global);
    out.seams.insert(out.seams.begin(), col);
  }
  out.dofs.assign(out.nodes_uv.size(), NodeConstraint{});
  return out;
}

}  // namespace

RefMesh apply_symmetry(const RefMesh& mesh, const SymmetrySpec& spec) {
  if (spec.mode != SymmetryMode::None && spec.n_gores < 3)
    throw ConfigError("symmetry: n_gores must be >= 3");

  // Idempotent re-tagging when the stitching already matches.
  if (mesh.mode == spec.mode && mesh.n_gores == spec.n_gores &&
      (spec.mode != SymmetryMode::Lobe || mesh.lobes == spec.lobes)) {
    RefMesh out = mesh;
    tag_dofs(out, spec);
    return out;
  }
  if (mesh.mode != SymmetryMode::None)
    throw ConfigError("symmetry: mesh is already stitched in a different mode");

  RefMesh out;
  switch (spec.mode) {
    case SymmetryMode::None:
    case SymmetryMode::HalfGore:
      out = mesh;
      out.multiplicity = spec.mode == SymmetryMode::HalfGore
                             ? 2.0 * double(spec.n_gores)
                             : 1.0;
      break;
    case SymmetryMode::Lobe: {
      if (spec.lobes < 1 || spec.n_gores % spec.lobes != 0)
        throw ConfigError("symmetry: lobe count q must divide n_gores");
      const int p = spec.n_gores / spec.lobes;  // gores per lobe
      out = stitch_halves(mesh, p, p % 2 == 0, false);
      out.multiplicity = 2.0 * double(spec.lobes);
      out.lobes = spec.lobes;
      break;
    }
    case SymmetryMode::Full: {
      out = stitch_halves(mesh, 2 * spec.n_gores, false, true);
      out.multiplicity = 1.0;
      break;
    }
  }
  out.mode = spec.mode;
  out.n_gores = spec.n_gores;
  if (spec.mode == SymmetryMode::Lobe) out.lobes = spec.lobes;
  tag_dofs(out, spec);
  return out;
}

Mat32 deformation_gradient(const Facet& facet, const DeformationState& state) {
  const Vec3& x0 = state.positions[size_t(facet.nodes[0])];
  const Vec3& x1 = state.positions[size_t(facet.nodes[1])];
  const Vec3& x2 = state.positions[size_t(facet.nodes[2])];
  Mat32 D;
  D.col(0) = x1 - x0;
  D.col(1) = x2 - x0;
  return D * facet.ref_edge_inv;
}

DofMap DofMap::build(const RefMesh& mesh, const DeformationState& x0) {
  DofMap dm;
  dm.entries_.resize(mesh.nodes_uv.size());
  int off = 0;
  for (size_t i = 0; i < mesh.nodes_uv.size(); ++i) {
    Entry& e = dm.entries_[i];
    e.kind = mesh.dofs[i].kind;
    e.offset = off;
    e.base = Vec3::Zero();
    switch (e.kind) {
      case DofKind::Free:
        off += 3;
        break;
      case DofKind::Plane: {
        const Vec3 n = mesh.dofs[i].plane_normal.normalized();
        e.e1 = n.cross(Vec3::UnitZ()).normalized();
        e.e2 = Vec3::UnitZ();
        off += 2;
        break;
      }
      case DofKind::Axis:
        e.e1 = Vec3::UnitZ();
        off += 1;
        break;
      case DofKind::Fixed:
        e.base = x0.positions[i];
        break;
    }
  }
  dm.n_dofs_ = off;
  return dm;
}

VecX DofMap::pack(const DeformationState& state) const {
  VecX q(n_dofs_);
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    const Vec3& x = state.positions[i];
    switch (e.kind) {
      case DofKind::Free:
        q.segment<3>(e.offset) = x;
        break;
      case DofKind::Plane:
        q[e.offset] = x.dot(e.e1);
        q[e.offset + 1] = x.dot(e.e2);
        break;
      case DofKind::Axis:
        q[e.offset] = x.z();
        break;
      case DofKind::Fixed:
        break;
    }
  }
  return q;
}

void DofMap::unpack(const VecX& q, DeformationState* state) const {
  state->positions.resize(entries_.size());
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    switch (e.kind) {
      case DofKind::Free:
        state->positions[i] = q.segment<3>(e.offset);
        break;
      case DofKind::Plane:
        state->positions[i] = q[e.offset] * e.e1 + q[e.offset + 1] * e.e2;
        break;
      case DofKind::Axis:
        state->positions[i] = Vec3(0.0, 0.0, q[e.offset]);
        break;
      case DofKind::Fixed:
        state->positions[i] = e.base;
        break;
    }
  }
}

VecX DofMap::reduce(const std::vector<Vec3>& g) const {
  VecX r = VecX::Zero(n_dofs_);
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    switch (e.kind) {
      case DofKind::Free:
        r.segment<3>(e.offset) = g[i];
        break;
      case DofKind::Plane:
        r[e.offset] = g[i].dot(e.e1);
        r[e.offset + 1] = g[i].dot(e.e2);
        break;
      case DofKind::Axis:
        r[e.offset] = g[i].z();
        break;
      case DofKind::Fixed:
        break;
    }
  }
  return r;
}

std::vector<Vec3> DofMap::spread(const VecX& dq) const {
  std::vector<Vec3> out(entries_.size(), Vec3::Zero());
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    switch (e.kind) {
      case DofKind::Free:
        out[i] = dq.segment<3>(e.offset);
        break;
      case DofKind::Plane:
        out[i] = dq[e.offset] * e.e1 + dq[e.offset + 1] * e.e2;
        break;
      case DofKind::Axis:
        out[i] = Vec3(0.0, 0.0, dq[e.offset]);
        break;
      case DofKind::Fixed:
        break;
    }
  }
  return out;
}

DeformationState lift_initial_guess(const RefMesh& mesh, const GoreSurface3D& gore) {
  const double L_c = gore.centerline_length();
  DeformationState raw;
  raw.positions.resize(mesh.nodes_uv.size());
  raw.tag = DeformationState::Tag::InitialGuess;

  for (size_t i = 0; i < mesh.nodes_uv.size(); ++i) {
    const double u = mesh.nodes_uv[i].x();
    const double vc = mesh.nodes_uv[i].y();
    if (vc < -1e-9 || vc > L_c * (1.0 + 1e-9))
      throw GeometryError("lift: node centerline coordinate outside the surface range");
    const double s = gore.s_of_centerline(std::clamp(vc, 0.0, L_c));
    double angle = 0.0;
    if (gore.mode == GoreMode::Pumpkin) {
      angle = u / gore.r_B;
      const double vb = gore.v_B_at(s);
      if (angle > vb * (1.0 + 1e-6) + 1e-9)
        throw GeometryError("lift: node lies outside the sampled rib arc");
      angle = std::min(angle, vb);
    } else {
      const double h = kPi * std::max(gore.gen.R_at(s), 0.0) / gore.n_gores;
      angle = (h > 1e-14) ? (u / h) * (kPi / gore.n_gores) : 0.0;
      if (angle > kPi / gore.n_gores * (1.0 + 1e-6))
        throw GeometryError("lift: node azimuth outside the gore wedge");
    }
    const bool mirrored = mesh.node_mirrored.empty() ? false : mesh.node_mirrored[i];
    const int g = mesh.node_gore.empty() ? 0 : mesh.node_gore[i];
    const Vec3 local = gore.point(s, mirrored ? -angle : angle);
    raw.positions[i] =
        (g == 0) ? local : rotate_z(local, 2.0 * kPi * double(g) / double(gore.n_gores));
  }

  // Project onto the admissibility constraints.
  const DofMap dm = DofMap::build(mesh, raw);
  DeformationState projected;
  dm.unpack(dm.pack(raw), &projected);
  projected.tag = DeformationState::Tag::InitialGuess;

  // orientation: outward adj2 on the lifted guess
  double vol6 = 0.0;
  for (const Facet& f : mesh.facets) {
    const Vec3& a = projected.positions[size_t(f.nodes[0])];
    const Vec3& b = projected.positions[size_t(f.nodes[1])];
    const Vec3& c = projected.positions[size_t(f.nodes[2])];
    vol6 += a.dot(b.cross(c));
  }
  const double scale = std::pow(std::max(gore.gen.r_max, 1.0), 3);
  if (vol6 < -1e-9 * scale)
    throw GeometryError("lift: facet orientation is inward; winding convention broken");
  return projected;
}

}  // namespace aerostat
