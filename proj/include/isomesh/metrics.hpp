#pragma once

#include "isomesh/core.hpp"

namespace isomesh {

/// Distance from p to the closest point of the closed triangle.
inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

/// Uniform-grid index over a mesh's triangles. Queries expand cell shells
/// outward until no unvisited cell can beat the best distance found, so the
/// result equals the brute-force minimum exactly.
class TriangleGrid {
public:
    explicit TriangleGrid(const TriangleMesh& mesh, int resolution = 24) : mesh_(&mesh) {
        if (mesh.patches.empty()) throw std::invalid_argument("TriangleGrid: empty mesh");
        lo_ = hi_ = mesh.vertices[0];
        for (const auto& v : mesh.vertices) {
            lo_ = lo_.cwiseMin(v);
            hi_ = hi_.cwiseMax(v);
        }
        const Vec3 extent = (hi_ - lo_).cwiseMax(1e-12);
        res_ = std::max(1, resolution);
        cell_ = extent / res_;
        cells_.resize(static_cast<std::size_t>(res_) * res_ * res_);
        for (int t = 0; t < static_cast<int>(mesh.patches.size()); ++t) {
            const auto& tri = mesh.patches[t];
            Vec3 tlo = mesh.vertices[tri[0]], thi = tlo;
            for (int k = 1; k < 3; ++k) {
                tlo = tlo.cwiseMin(mesh.vertices[tri[k]]);
                thi = thi.cwiseMax(mesh.vertices[tri[k]]);
            }
            const auto [i0, j0, k0] = cellOf(tlo);
            const auto [i1, j1, k1] = cellOf(thi);
            for (int i = i0; i <= i1; ++i)
                for (int j = j0; j <= j1; ++j)
                    for (int k = k0; k <= k1; ++k) cells_[index(i, j, k)].push_back(t);
        }
    }

    /// Min distance from p to any triangle of the mesh.
    double distance(const Vec3& p) const {
        const auto [pi, pj, pk] = cellOf(p);
        double best = std::numeric_limits<double>::infinity();
        const int maxShell = 2 * res_;
        for (int shell = 0; shell <= maxShell; ++shell) {
            if (best < std::numeric_limits<double>::infinity() &&
                shellMinDistance(p, shell) > best)
                break;
            visitShell(pi, pj, pk, shell, [&](int i, int j, int k) {
                for (int t : cells_[index(i, j, k)]) {
                    const auto& tri = mesh_->patches[t];
                    const double d = point_triangle_distance(p, mesh_->vertices[tri[0]],
                                                             mesh_->vertices[tri[1]],
                                                             mesh_->vertices[tri[2]]);
                    if (d < best) best = d;
                }
            });
        }
        return best;
    }

private:
    std::tuple<int, int, int> cellOf(const Vec3& p) const {
        auto clampIdx = [&](double x, double lo, double step) {
            return std::clamp(static_cast<int>(std::floor((x - lo) / step)), 0, res_ - 1);
        };
        return {clampIdx(p.x(), lo_.x(), cell_.x()), clampIdx(p.y(), lo_.y(), cell_.y()),
                clampIdx(p.z(), lo_.z(), cell_.z())};
    }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * res_ + j) * res_ + k;
    }

    /// Lower bound on the distance from p to any cell `shell` rings away
    /// from p's cell (conservative: uses the smallest cell dimension).
    double shellMinDistance(const Vec3& p, int shell) const {
        if (shell == 0) return 0.0;
        const auto [i, j, k] = cellOf(p);
        // Distance from p to the boundary of the box of cells within
        // shell-1 rings; outside cells cannot be closer than that.
        const Vec3 boxLo = lo_ + Vec3((i - (shell - 1)) * cell_.x(), (j - (shell - 1)) * cell_.y(),
                                      (k - (shell - 1)) * cell_.z());
        const Vec3 boxHi = lo_ + Vec3((i + shell) * cell_.x(), (j + shell) * cell_.y(),
                                      (k + shell) * cell_.z());
        // p lies inside that box; the bound is its distance to the boundary.
        const double toBoundary =
            std::min((p - boxLo).minCoeff(), (boxHi - p).minCoeff());
        return std::max(0.0, toBoundary);
    }

    template <typename F>
    void visitShell(int ci, int cj, int ck, int shell, F&& f) const {
        const int i0 = std::max(0, ci - shell), i1 = std::min(res_ - 1, ci + shell);
        const int j0 = std::max(0, cj - shell), j1 = std::min(res_ - 1, cj + shell);
        const int k0 = std::max(0, ck - shell), k1 = std::min(res_ - 1, ck + shell);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j)
                for (int k = k0; k <= k1; ++k) {
                    const int ring = std::max({std::abs(i - ci), std::abs(j - cj), std::abs(k - ck)});
                    if (ring == shell) f(i, j, k);
                }
    }

    const TriangleMesh* mesh_;
    Vec3 lo_, hi_, cell_;
    int res_ = 1;
    std::vector<std::vector<int>> cells_;
};

struct PmReport {
    double value = 0.0;      // the PM distance
    double meanRtoG = 0.0;   // mean over R's vertices of distance to G
    double meanGtoR = 0.0;   // mean over G's vertices of distance to R
    std::vector<double> perVertex;  // d(v, G) for every vertex of R
};

/// Symmetric point-mesh distance: half the sum of the two mean
/// vertex-to-surface distances.
inline PmReport pm_distance(const TriangleMesh& r, const TriangleMesh& g) {
    if (r.vertices.empty() || g.vertices.empty())
        throw std::invalid_argument("pm_distance: empty mesh");
    const TriangleGrid gridG(g), gridR(r);
    PmReport report;
    report.perVertex.reserve(r.vertices.size());
    double sumR = 0.0;
    for (const auto& v : r.vertices) {
        const double d = gridG.distance(v);
        report.perVertex.push_back(d);
        sumR += d;
    }
    double sumG = 0.0;
    for (const auto& p : g.vertices) sumG += gridR.distance(p);
    report.meanRtoG = sumR / r.vertices.size();
    report.meanGtoR = sumG / g.vertices.size();
    report.value = 0.5 * (report.meanRtoG + report.meanGtoR);
    return report;
}

/// Reference brute-force PM distance (O(V*F)); the grid must match it.
inline double pm_distance_bruteforce(const TriangleMesh& r, const TriangleMesh& g) {
    auto meanDist = [](const TriangleMesh& from, const TriangleMesh& to) {
        double sum = 0.0;
        for (const auto& v : from.vertices) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& tri : to.patches) {
                best = std::min(best, point_triangle_distance(v, to.vertices[tri[0]],
                                                              to.vertices[tri[1]],
                                                              to.vertices[tri[2]]));
            }
            sum += best;
        }
        return sum / from.vertices.size();
    };
    return 0.5 * (meanDist(r, g) + meanDist(g, r));
}

/// (delta, sigma) noise model: a uniformly random ceil(delta*|cloud|/100)
/// subset of points receives an independent per-coordinate offset uniform in
/// [-sigma, sigma].
struct NoiseSpec {
    double delta = 0.0;  // percentage of points perturbed, [0, 100]
    double sigma = 0.0;  // mm
    std::uint64_t seed = 0;
};

inline PointCloud add_noise(const PointCloud& cloud, const NoiseSpec& spec) {
    if (spec.delta < 0.0 || spec.delta > 100.0)
        throw std::invalid_argument("add_noise: delta must be in [0, 100]");
    if (spec.sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
    PointCloud out = cloud;
    const std::size_t n = cloud.size();
    const std::size_t count =
        static_cast<std::size_t>(std::ceil(spec.delta * static_cast<double>(n) / 100.0));
    if (count == 0) return out;

    Rng rng(spec.seed);
    // Partial Fisher-Yates picks the perturbed subset.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    std::uniform_real_distribution<double> offset(-spec.sigma, spec.sigma);
    for (std::size_t i = 0; i < count; ++i) {
        Vec3& p = out.points[order[i]];
        p += Vec3(offset(rng), offset(rng), offset(rng));
    }
    return out;
}

}  // namespace isomesh
