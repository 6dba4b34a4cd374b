#pragma once

#include "isomesh/core.hpp"

namespace isomesh {

constexpr int kPolyDegree = 5;
constexpr int kPolyTerms = 21;  // (5+1)(5+2)/2 monomials u^i v^j, i+j <= 5

/// Bivariate degree-5 height field over an orthonormal local frame:
/// surface(u, v) = origin + u*axisU + v*axisV + h(u, v)*axisW.
struct PolySurface {
    Vec3 origin = Vec3::Zero();
    Vec3 axisU = Vec3::UnitX(), axisV = Vec3::UnitY(), axisW = Vec3::UnitZ();
    Eigen::Matrix<double, kPolyTerms, 1> coefficients =
        Eigen::Matrix<double, kPolyTerms, 1>::Zero();

    static void monomials(double u, double v, Eigen::Matrix<double, kPolyTerms, 1>& row) {
        int k = 0;
        double up = 1.0;
        for (int i = 0; i <= kPolyDegree; ++i) {
            double vp = 1.0;
            for (int j = 0; j <= kPolyDegree - i; ++j) {
                row[k++] = up * vp;
                vp *= v;
            }
            up *= u;
        }
    }

    double height(double u, double v) const {
        Eigen::Matrix<double, kPolyTerms, 1> row;
        monomials(u, v, row);
        return coefficients.dot(row);
    }

    Vec3 lift(double u, double v) const {
        return origin + u * axisU + v * axisV + height(u, v) * axisW;
    }

    Vec2 project(const Vec3& p) const {
        const Vec3 d = p - origin;
        return {d.dot(axisU), d.dot(axisV)};
    }

    double residual(const Vec3& p) const {
        const Vec3 d = p - origin;
        return std::abs(height(d.dot(axisU), d.dot(axisV)) - d.dot(axisW));
    }
};

struct PolyFit {
    PolySurface surface;
    double fitError = 0.0;  // max residual over the fitted points
};

/// Least-squares degree-5 fit of the out-of-plane coordinate as a function
/// of the two in-plane coordinates in a PCA frame (normal = least-variance
/// axis). Under-determined fits (< 21 points) are ridge-regularized.
inline PolyFit fit_polynomial(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("fit_polynomial: empty cloud");
    const int n = static_cast<int>(cloud.size());

    Vec3 mean = Vec3::Zero();
    for (const auto& p : cloud.points) mean += p;
    mean /= n;

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : cloud.points) {
        const Vec3 d = p - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);

    PolyFit fit;
    fit.surface.origin = mean;
    // Eigenvalues ascend: the least-variance direction is the normal.
    fit.surface.axisW = eig.eigenvectors().col(0);
    fit.surface.axisU = eig.eigenvectors().col(2);
    fit.surface.axisV = fit.surface.axisW.cross(fit.surface.axisU);
    // Deterministic sign convention.
    auto fixSign = [](Vec3& a) {
        int k;
        a.cwiseAbs().maxCoeff(&k);
        if (a[k] < 0.0) a = -a;
    };
    fixSign(fit.surface.axisU);
    fixSign(fit.surface.axisW);
    fit.surface.axisV = fit.surface.axisW.cross(fit.surface.axisU);

    Eigen::MatrixXd design(n, kPolyTerms);
    Eigen::VectorXd heights(n);
    Eigen::Matrix<double, kPolyTerms, 1> row;
    for (int i = 0; i < n; ++i) {
        const Vec3 d = cloud.points[i] - mean;
        PolySurface::monomials(d.dot(fit.surface.axisU), d.dot(fit.surface.axisV), row);
        design.row(i) = row.transpose();
        heights[i] = d.dot(fit.surface.axisW);
    }

    Eigen::Matrix<double, kPolyTerms, kPolyTerms> normal = design.transpose() * design;
    const double ridge =
        n < kPolyTerms ? 1e-8 * std::max(normal.trace() / kPolyTerms, 1e-12) : 0.0;
    normal.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::Matrix<double, kPolyTerms, kPolyTerms>> solver(normal);
    fit.surface.coefficients = solver.solve(design.transpose() * heights);
    if (!fit.surface.coefficients.allFinite() || solver.info() != Eigen::Success) {
        // Rank deficiency without enough ridge: retry with a stronger one.
        normal.diagonal().array() += 1e-6 * std::max(normal.trace() / kPolyTerms, 1e-12);
        Eigen::LDLT<Eigen::Matrix<double, kPolyTerms, kPolyTerms>> retry(normal);
        fit.surface.coefficients = retry.solve(design.transpose() * heights);
        if (!fit.surface.coefficients.allFinite())
            throw std::runtime_error("fit_polynomial: rank-deficient design matrix");
    }

    const Eigen::VectorXd residuals = design * fit.surface.coefficients - heights;
    fit.fitError = residuals.cwiseAbs().maxCoeff();
    return fit;
}

/// Random points on a fitted surface, uniform in (u, v) over the fitted
/// points' footprint (their bounding rectangle in the frame).
inline PointCloud sample_poly_surface(const PolySurface& surface, const PointCloud& fitted,
                                      int count, Rng& rng) {
    if (fitted.empty()) throw std::invalid_argument("sample_poly_surface: empty footprint");
    double uLo = std::numeric_limits<double>::infinity(), uHi = -uLo;
    double vLo = uLo, vHi = -uLo;
    for (const auto& p : fitted.points) {
        const Vec2 uv = surface.project(p);
        uLo = std::min(uLo, uv.x());
        uHi = std::max(uHi, uv.x());
        vLo = std::min(vLo, uv.y());
        vHi = std::max(vHi, uv.y());
    }
    std::uniform_real_distribution<double> du(uLo, uHi), dv(vLo, vHi);
    PointCloud out;
    out.points.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double u = du(rng), v = dv(rng);
        out.points.push_back(surface.lift(u, v));
    }
    return out;
}

}  // namespace isomesh
