// Procedural meshes used by the self-test corpus, the acceptance suite and
// CLI smoke tests. Closed shapes are outward oriented.

#pragma once

#include "geoforge/mesh.hpp"

#include <span>
#include <vector>

namespace geoforge::shapes {

TriangleMesh icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());
TriangleMesh ellipsoid(const Vec3& radii, int subdivisions, const Vec3& center = Vec3::Zero());
TriangleMesh box(const Vec3& lo, const Vec3& hi);
/// Box without its +z face.
TriangleMesh open_box(const Vec3& lo, const Vec3& hi);
TriangleMesh torus(double major, double minor, int major_segments, int minor_segments,
                   const Vec3& center = Vec3::Zero());
TriangleMesh cylinder(double radius, double half_height, int segments, const Vec3& center = Vec3::Zero());
/// Axis-aligned zero-thickness rectangle in the plane z = height.
TriangleMesh sheet(double x0, double x1, double y0, double y1, double height);

/// Rectangle in a face plane, in that face's (u, v) coordinates.
struct FaceRect {
  double u0, u1, v0, v1;
};

/// Box whose face on `axis` (at hi[axis] when `positive`, else lo[axis]) has
/// rectangular holes. The other five faces are solid. u and v are the two
/// remaining axes in increasing order.
TriangleMesh box_with_holes(const Vec3& lo, const Vec3& hi, int axis, bool positive,
                            const std::vector<FaceRect>& holes);

TriangleMesh merge(std::span<const TriangleMesh> parts);
TriangleMesh translated(const TriangleMesh& mesh, const Vec3& offset);

}  // namespace geoforge::shapes
