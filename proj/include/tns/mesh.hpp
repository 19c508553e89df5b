// Structured Kuhn-subdivided tetrahedral mesh of the flat torus (R/2piZ)^3.
#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tns {

using Vec3 = Eigen::Vector3d;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Side length of the periodic box.
inline constexpr double kTorusSide = kTwoPi;

using Tet = std::array<int, 4>;

/// Immutable periodic mesh. Vertex indices in `tets` already carry the
/// periodic identification; `tet_points` holds the unwrapped corner
/// coordinates used for element geometry.
struct PeriodicMesh {
    int n_cells = 0;
    std::vector<Vec3> vertices;
    std::vector<Tet> tets;
    std::vector<std::array<Vec3, 4>> tet_points;
    double h = 0.0;
    double shape_ratio = 0.0;

    [[nodiscard]] std::size_t num_vertices() const { return vertices.size(); }
    [[nodiscard]] std::size_t num_tets() const { return tets.size(); }
    [[nodiscard]] double tet_volume(std::size_t t) const;
};

/// Builds the n^3 grid of cubes, each split by the Freudenthal pattern into
/// six tetrahedra sharing the main diagonal. Throws std::invalid_argument for
/// n_cells < 2.
[[nodiscard]] PeriodicMesh build_torus_mesh(int n_cells);

[[nodiscard]] double mesh_size(const PeriodicMesh& mesh);

/// Signed volume of the tetrahedron (a, b, c, d).
[[nodiscard]] double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Maximum edge length of a tetrahedron.
[[nodiscard]] double diameter(const std::array<Vec3, 4>& p);

/// 3 * volume / total face area.
[[nodiscard]] double inradius(const std::array<Vec3, 4>& p);

/// Header "TORUS3D n", one vertex per line, then one tet per line.
void write_mesh_dump(const PeriodicMesh& mesh, std::ostream& os);

}  // namespace tns
