#include <array>
#include <cmath>

#include "aerostat/solver.hpp"

namespace aerostat {

namespace {

// Segment-triangle intersection with strict interior crossing.
bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b,
                           const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, pq = q - p;
  const Vec3 n = ab.cross(ac);
  const double d = n.dot(pq);
  if (std::abs(d) < 1e-14) return false;  // parallel (coplanar handled as miss)
  const double t = n.dot(a - p) / d;
  if (t <= 1e-10 || t >= 1.0 - 1e-10) return false;
  const Vec3 x = p + t * pq;
  // barycentric test
  const Vec3 v0 = ab, v1 = ac, v2 = x - a;
  const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  const double d20 = v2.dot(v0), d21 = v2.dot(v1);
  const double den = d00 * d11 - d01 * d01;
  if (std::abs(den) < 1e-30) return false;
  const double v = (d11 * d20 - d01 * d21) / den;
  const double w = (d00 * d21 - d01 * d20) / den;
  return v > 1e-10 && w > 1e-10 && (v + w) < 1.0 - 1e-10;
}

bool triangles_intersect(const std::array<Vec3, 3>& A, const std::array<Vec3, 3>& B) {
  for (int e = 0; e < 3; ++e) {
    if (segment_hits_triangle(A[size_t(e)], A[size_t((e + 1) % 3)], B[0], B[1], B[2]))
      return true;
    if (segment_hits_triangle(B[size_t(e)], B[size_t((e + 1) % 3)], A[0], A[1], A[2]))
      return true;
  }
  return false;
}

}  // namespace

int self_intersection_count(const DeformationState& state, const RefMesh& mesh) {
  const auto& facets = mesh.facets;
  int count = 0;
  for (size_t i = 0; i < facets.size(); ++i) {
    std::array<Vec3, 3> A = {state.positions[size_t(facets[i].nodes[0])],
                             state.positions[size_t(facets[i].nodes[1])],
                             state.positions[size_t(facets[i].nodes[2])]};
    for (size_t j = i + 1; j < facets.size(); ++j) {
      bool shared = false;
      for (int a : facets[i].nodes)
        for (int b : facets[j].nodes)
          if (a == b) shared = true;
      if (shared) continue;
      std::array<Vec3, 3> B = {state.positions[size_t(facets[j].nodes[0])],
                               state.positions[size_t(facets[j].nodes[1])],
                               state.positions[size_t(facets[j].nodes[2])]};
      if (triangles_intersect(A, B)) ++count;
    }
  }
  return count;
}

}  // namespace aerostat
