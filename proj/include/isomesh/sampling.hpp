#pragma once

#include "isomesh/core.hpp"

namespace isomesh {

namespace detail {

/// Area-uniform random points on a set of triangles. `tris` are vertex
/// triples resolved against `verts`.
inline std::vector<Vec3> sample_triangles_uniform(const std::vector<Vec3>& verts,
                                                  const std::vector<std::array<int, 3>>& tris,
                                                  int count, Rng& rng) {
    std::vector<double> cumArea(tris.size());
    double total = 0.0;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        total += triangle_area(verts[tris[t][0]], verts[tris[t][1]], verts[tris[t][2]]);
        cumArea[t] = total;
    }
    if (total <= 0.0) throw std::runtime_error("sample_triangles_uniform: zero total area");
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Vec3> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double pick = uni(rng) * total;
        const std::size_t t =
            std::lower_bound(cumArea.begin(), cumArea.end(), pick) - cumArea.begin();
        const auto& tri = tris[std::min(t, tris.size() - 1)];
        double u = uni(rng), v = uni(rng);
        if (u + v > 1.0) { u = 1.0 - u; v = 1.0 - v; }
        out.push_back(verts[tri[0]] + u * (verts[tri[1]] - verts[tri[0]]) +
                      v * (verts[tri[2]] - verts[tri[0]]));
    }
    return out;
}

inline Vec3 project_to_triangles(const Vec3& p, const std::vector<Vec3>& verts,
                                 const std::vector<std::array<int, 3>>& tris) {
    Vec3 best = verts[tris[0][0]];
    double bestD = std::numeric_limits<double>::infinity();
    for (const auto& tri : tris) {
        const Vec3 q = closest_point_on_triangle(p, verts[tri[0]], verts[tri[1]], verts[tri[2]]);
        const double d = (p - q).squaredNorm();
        if (d < bestD) { bestD = d; best = q; }
    }
    return best;
}

}  // namespace detail

/// Centroidal-Voronoi sampling of a mesh region: area-uniform seeds relaxed
/// by Lloyd iterations against a dense candidate set, with barycentric
/// reprojection onto the region's patches after each averaging step.
inline PointCloud lloyd_sample(const TriangleMesh& mesh, const LocalRegion& region, int count,
                               int iterations, Rng& rng) {
    if (count < 1) throw std::invalid_argument("lloyd_sample: count must be >= 1");
    if (region.patchIndices.empty()) throw std::runtime_error("lloyd_sample: region has no patches");

    std::vector<std::array<int, 3>> tris;
    tris.reserve(region.patchIndices.size());
    for (int t : region.patchIndices) tris.push_back(mesh.patches[t]);

    std::vector<Vec3> seeds = detail::sample_triangles_uniform(mesh.vertices, tris, count, rng);
    const int densityCount = std::max(3000, 25 * count);
    const std::vector<Vec3> density =
        detail::sample_triangles_uniform(mesh.vertices, tris, densityCount, rng);

    for (int it = 0; it < iterations; ++it) {
        std::vector<Vec3> acc(seeds.size(), Vec3::Zero());
        std::vector<int> hits(seeds.size(), 0);
        for (const Vec3& q : density) {
            int best = 0;
            double bestD = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < seeds.size(); ++s) {
                const double d = (q - seeds[s]).squaredNorm();
                if (d < bestD) { bestD = d; best = static_cast<int>(s); }
            }
            acc[best] += q;
            ++hits[best];
        }
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            if (hits[s] == 0) continue;  // starved cell keeps its seed
            seeds[s] = detail::project_to_triangles(acc[s] / hits[s], mesh.vertices, tris);
        }
    }

    PointCloud out;
    out.points = std::move(seeds);
    return out;
}

}  // namespace isomesh
