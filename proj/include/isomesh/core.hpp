#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace isomesh {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Rng = std::mt19937_64;

constexpr double kPi = 3.14159265358979323846;

/// Unordered set of 3D points (millimetres).
struct PointCloud {
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Triangle mesh with fixed connectivity; only vertex coordinates change
/// between pipeline stages.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> patches;
};

/// Subset of mesh vertices/patches with per-vertex fusion weights.
struct LocalRegion {
    std::vector<int> vertexIndices;
    std::vector<int> patchIndices;
    std::vector<double> weights;  // aligned with vertexIndices, each in [0,1]
    int anchorIndex = -1;         // coarse regions only
};

inline void validate_mesh(const TriangleMesh& mesh) {
    const int n = static_cast<int>(mesh.vertices.size());
    for (const auto& t : mesh.patches) {
        for (int k : t) {
            if (k < 0 || k >= n) throw std::invalid_argument("patch index out of range");
        }
    }
}

inline long euler_characteristic(const TriangleMesh& mesh) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(mesh.patches.size() * 3);
    for (const auto& t : mesh.patches) {
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return static_cast<long>(mesh.vertices.size()) - static_cast<long>(edges.size()) +
           static_cast<long>(mesh.patches.size());
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

/// Closest point of the closed triangle (a,b,c) to p. Ericson, Real-Time
/// Collision Detection, 5.1.5.
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                      const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double denom = d1 - d3;
        const double v = denom > 0.0 ? d1 / denom : 0.0;
        return a + v * ab;
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double denom = d2 - d6;
        const double w = denom > 0.0 ? d2 / denom : 0.0;
        return a + w * ac;
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double denom = (d4 - d3) + (d5 - d6);
        const double w = denom > 0.0 ? (d4 - d3) / denom : 0.0;
        return b + w * (c - b);
    }

    const double denom = va + vb + vc;
    if (denom <= 0.0) {
        // Degenerate triangle: fall back to the closest edge point.
        Vec3 best = a;
        double bestD = (p - a).squaredNorm();
        auto tryEdge = [&](const Vec3& u, const Vec3& v) {
            const Vec3 uv = v - u;
            const double len2 = uv.squaredNorm();
            const double t = len2 > 0.0 ? std::clamp((p - u).dot(uv) / len2, 0.0, 1.0) : 0.0;
            const Vec3 q = u + t * uv;
            const double d = (p - q).squaredNorm();
            if (d < bestD) { bestD = d; best = q; }
        };
        tryEdge(a, b);
        tryEdge(b, c);
        tryEdge(c, a);
        return best;
    }
    const double v = vb / denom, w = vc / denom;
    return a + v * ab + w * ac;
}

/// Per-vertex normals: area-weighted average of incident patch normals,
/// oriented by the stored winding. Zero vector marks an undefined normal.
inline std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
    std::vector<Vec3> acc(mesh.vertices.size(), Vec3::Zero());
    for (const auto& t : mesh.patches) {
        const Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                           .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        // |n| = 2*area, so summing unnormalized face normals is area weighting.
        for (int k : t) acc[k] += n;
    }
    for (auto& n : acc) {
        const double len = n.norm();
        if (len > 1e-300) n /= len;
        else n.setZero();
    }
    return acc;
}

}  // namespace isomesh
