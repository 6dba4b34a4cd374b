#pragma once

#include "isomesh/core.hpp"

#include <map>
#include <tuple>

namespace isomesh {

namespace detail {

struct IcosahedronBase {
    std::array<Vec3, 12> vertices;
    std::array<std::array<int, 3>, 20> faces;
};

inline const IcosahedronBase& icosahedron_base() {
    static const IcosahedronBase base = [] {
        IcosahedronBase b;
        const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
        const double s = 1.0 / std::sqrt(1.0 + phi * phi);
        int k = 0;
        for (double a : {-1.0, 1.0})
            for (double c : {-phi, phi}) {
                b.vertices[k++] = s * Vec3(a, c, 0.0);
                b.vertices[k++] = s * Vec3(0.0, a, c);
                b.vertices[k++] = s * Vec3(c, 0.0, a);
            }
        // Faces by nearest-triplet construction: every face of the icosahedron
        // is a triple of mutually adjacent vertices (chord distance = edge).
        const double edge = 2.0 * s;  // edge length of the unit icosahedron
        int f = 0;
        for (int i = 0; i < 12; ++i)
            for (int j = i + 1; j < 12; ++j)
                for (int l = j + 1; l < 12; ++l) {
                    auto close = [&](int a, int c) {
                        return std::abs((b.vertices[a] - b.vertices[c]).norm() - edge) < 1e-9;
                    };
                    if (close(i, j) && close(j, l) && close(i, l)) {
                        // Orient outward.
                        std::array<int, 3> tri{i, j, l};
                        const Vec3 n = (b.vertices[j] - b.vertices[i])
                                           .cross(b.vertices[l] - b.vertices[i]);
                        if (n.dot(b.vertices[i] + b.vertices[j] + b.vertices[l]) < 0.0)
                            std::swap(tri[1], tri[2]);
                        b.faces[f++] = tri;
                    }
                }
        return b;
    }();
    return base;
}

}  // namespace detail

/// Geodesic icosahedron of the given frequency: each icosahedron edge is
/// split into `frequency` segments, each face triangulated into frequency^2
/// triangles, all vertices projected to the sphere. Vertex count is
/// 10*frequency^2 + 2; the 12 icosahedron vertices occupy indices 0..11.
inline TriangleMesh build_icosphere(int frequency, double radius) {
    if (frequency < 1) throw std::invalid_argument("build_icosphere: frequency must be >= 1");
    const auto& base = detail::icosahedron_base();
    const int n = frequency;

    TriangleMesh mesh;
    mesh.vertices.reserve(10 * n * n + 2);
    for (const auto& v : base.vertices) mesh.vertices.push_back(radius * v);

    // Shared lattice points are deduplicated through canonical keys:
    // corners by base-vertex id, edge points by (ordered vertex pair, step).
    std::map<std::tuple<int, int, int>, int> edgePoints;
    auto edgePoint = [&](int a, int b, int step) {
        if (a > b) { std::swap(a, b); step = n - step; }
        auto it = edgePoints.find({a, b, step});
        if (it != edgePoints.end()) return it->second;
        const Vec3 p = ((n - step) * base.vertices[a] + step * base.vertices[b]) / n;
        mesh.vertices.push_back(radius * p.normalized());
        const int idx = static_cast<int>(mesh.vertices.size()) - 1;
        edgePoints.emplace(std::make_tuple(a, b, step), idx);
        return idx;
    };

    for (const auto& face : base.faces) {
        const Vec3 A = base.vertices[face[0]], B = base.vertices[face[1]],
                   C = base.vertices[face[2]];
        // Lattice index (i,j): point = A + i/n*(B-A) + j/n*(C-A), i+j <= n.
        std::vector<int> grid((n + 1) * (n + 2) / 2);
        auto slot = [&](int i, int j) -> int& {
            // Row i holds n+1-i entries.
            const int offset = i * (n + 1) - i * (i - 1) / 2;
            return grid[offset + j];
        };
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n - i; ++j) {
                const int k = n - i - j;
                int idx;
                if (i == n) idx = face[1];
                else if (j == n) idx = face[2];
                else if (k == n) idx = face[0];
                else if (k == 0) idx = edgePoint(face[1], face[2], j);
                else if (j == 0) idx = edgePoint(face[0], face[1], i);
                else if (i == 0) idx = edgePoint(face[0], face[2], j);
                else {
                    const Vec3 p = (k * A + i * B + j * C) / n;
                    mesh.vertices.push_back(radius * p.normalized());
                    idx = static_cast<int>(mesh.vertices.size()) - 1;
                }
                slot(i, j) = idx;
            }
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n - i; ++j) {
                mesh.patches.push_back({slot(i, j), slot(i + 1, j), slot(i, j + 1)});
                if (j < n - i - 1)
                    mesh.patches.push_back({slot(i + 1, j), slot(i + 1, j + 1), slot(i, j + 1)});
            }
        }
    }
    return mesh;
}

/// The 32 anchor vertices: the 12 icosahedron vertices plus, per base face,
/// the mesh vertex closest to the ray from the origin through the face
/// centroid. The mesh must come from build_icosphere.
inline std::vector<int> select_anchors(const TriangleMesh& mesh) {
    const auto& base = detail::icosahedron_base();
    if (mesh.vertices.size() < 12) throw std::invalid_argument("select_anchors: not an icosphere");
    const double radius = mesh.vertices[0].norm();
    if (radius <= 0.0) throw std::invalid_argument("select_anchors: degenerate mesh");
    for (int i = 0; i < 12; ++i) {
        if ((mesh.vertices[i] / radius - base.vertices[i]).norm() > 1e-6)
            throw std::invalid_argument("select_anchors: mesh was not produced by build_icosphere");
    }

    std::vector<int> anchors;
    anchors.reserve(32);
    for (int i = 0; i < 12; ++i) anchors.push_back(i);
    for (const auto& face : base.faces) {
        const Vec3 dir = (base.vertices[face[0]] + base.vertices[face[1]] +
                          base.vertices[face[2]]).normalized();
        int best = -1;
        double bestDot = -2.0;
        for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
            const double d = dir.dot(mesh.vertices[v].normalized());
            if (d > bestDot) { bestDot = d; best = v; }
        }
        anchors.push_back(best);
    }
    return anchors;
}

/// Central angle between two directions from the origin.
inline double central_angle(const Vec3& a, const Vec3& b) {
    const double c = a.dot(b) / (a.norm() * b.norm());
    return std::acos(std::clamp(c, -1.0, 1.0));
}

/// Divide the icosphere into 32 overlapping regions. Region i holds every
/// vertex whose central angle to anchor i is < tauA, weighted 1 - angle/tauA,
/// plus every patch all of whose vertices are in the region. Throws when a
/// vertex ends up in no region (tauA too small for the mesh resolution).
inline std::vector<LocalRegion> partition_coarse(const TriangleMesh& mesh,
                                                 const std::vector<int>& anchors,
                                                 double tauA) {
    if (tauA <= 0.0) throw std::invalid_argument("partition_coarse: tauA must be > 0");
    std::vector<LocalRegion> regions(anchors.size());
    std::vector<char> covered(mesh.vertices.size(), 0);
    std::vector<std::vector<char>> member(anchors.size(),
                                          std::vector<char>(mesh.vertices.size(), 0));
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        LocalRegion& r = regions[i];
        r.anchorIndex = anchors[i];
        const Vec3& a = mesh.vertices[anchors[i]];
        for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
            const double angle = central_angle(mesh.vertices[v], a);
            if (angle < tauA) {
                r.vertexIndices.push_back(v);
                r.weights.push_back(1.0 - angle / tauA);
                member[i][v] = 1;
                covered[v] = 1;
            }
        }
        for (int t = 0; t < static_cast<int>(mesh.patches.size()); ++t) {
            const auto& p = mesh.patches[t];
            if (member[i][p[0]] && member[i][p[1]] && member[i][p[2]])
                r.patchIndices.push_back(t);
        }
    }
    for (std::size_t v = 0; v < covered.size(); ++v) {
        if (!covered[v])
            throw std::runtime_error("partition_coarse: vertex " + std::to_string(v) +
                                     " is in no region; tauA too small for this resolution");
    }
    return regions;
}

/// Quasi-uniform points on the sphere of the given radius (Fibonacci spiral).
inline PointCloud fibonacci_sample(double radius, int count) {
    if (count < 1) throw std::invalid_argument("fibonacci_sample: count must be >= 1");
    PointCloud cloud;
    cloud.points.reserve(count);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        const double z = count == 1 ? 0.0 : 1.0 - 2.0 * i / (count - 1.0);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        cloud.points.emplace_back(radius * r * std::cos(phi), radius * r * std::sin(phi),
                                  radius * z);
    }
    return cloud;
}

}  // namespace isomesh
