#include "tns/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tns {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

double diameter(const std::array<Vec3, 4>& p) {
    double dmax = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) dmax = std::max(dmax, (p[i] - p[j]).norm());
    return dmax;
}

double inradius(const std::array<Vec3, 4>& p) {
    constexpr int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
    double area = 0.0;
    for (const auto& f : faces)
        area += 0.5 * (p[f[1]] - p[f[0]]).cross(p[f[2]] - p[f[0]]).norm();
    return 3.0 * std::abs(signed_volume(p[0], p[1], p[2], p[3])) / area;
}

double PeriodicMesh::tet_volume(std::size_t t) const {
    const auto& p = tet_points[t];
    return signed_volume(p[0], p[1], p[2], p[3]);
}

PeriodicMesh build_torus_mesh(int n_cells) {
    if (n_cells < 2)
        throw std::invalid_argument("build_torus_mesh: n_cells must be >= 2, got " +
                                    std::to_string(n_cells));
    const int n = n_cells;
    const double dx = kTorusSide / n;

    PeriodicMesh mesh;
    mesh.n_cells = n;
    mesh.vertices.reserve(static_cast<std::size_t>(n) * n * n);
    auto vid = [n](int i, int j, int k) {
        i = ((i % n) + n) % n;
        j = ((j % n) + n) % n;
        k = ((k % n) + n) % n;
        return (k * n + j) * n + i;
    };
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) mesh.vertices.emplace_back(i * dx, j * dx, k * dx);

    // Each permutation of the axes gives one monotone path 0 -> (1,1,1).
    constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    mesh.tets.reserve(6 * mesh.vertices.size());
    mesh.tet_points.reserve(6 * mesh.vertices.size());
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                for (const auto& perm : perms) {
                    std::array<int, 3> off{0, 0, 0};
                    std::array<std::array<int, 3>, 4> corner;
                    corner[0] = off;
                    for (int s = 0; s < 3; ++s) {
                        off[perm[s]] = 1;
                        corner[s + 1] = off;
                    }
                    Tet tet;
                    std::array<Vec3, 4> pts;
                    for (int c = 0; c < 4; ++c) {
                        const int a = i + corner[c][0], b = j + corner[c][1], d = k + corner[c][2];
                        tet[c] = vid(a, b, d);
                        pts[c] = Vec3(a * dx, b * dx, d * dx);
                    }
                    if (signed_volume(pts[0], pts[1], pts[2], pts[3]) < 0.0) {
                        std::swap(tet[2], tet[3]);
                        std::swap(pts[2], pts[3]);
                    }
                    mesh.tets.push_back(tet);
                    mesh.tet_points.push_back(pts);
                }

    for (const auto& pts : mesh.tet_points) {
        const double d = diameter(pts);
        mesh.h = std::max(mesh.h, d);
        mesh.shape_ratio = std::max(mesh.shape_ratio, d / inradius(pts));
    }
    return mesh;
}

double mesh_size(const PeriodicMesh& mesh) { return mesh.h; }

void write_mesh_dump(const PeriodicMesh& mesh, std::ostream& os) {
    os << "TORUS3D " << mesh.n_cells << '\n' << std::setprecision(17);
    for (const auto& v : mesh.vertices) os << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.tets) os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
}

}  // namespace tns
