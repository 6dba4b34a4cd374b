#pragma once

#include "isomesh/core.hpp"

namespace isomesh {

/// Entropic transport plan between two point sets with uniform marginals.
struct TransportPlan {
    Eigen::MatrixXd plan;  // |A| x |B|, nonnegative
    double rowMarginalError = 0.0;
    double colMarginalError = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Hard source->target assignment extracted from a plan.
struct Correspondence {
    std::vector<int> targetOf;  // targetOf[sourceIndex] = targetIndex
};

namespace detail {

inline Eigen::MatrixXd squared_cost_matrix(const PointCloud& a, const PointCloud& b) {
    const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
    Eigen::MatrixXd A(n, 3), B(m, 3);
    for (int i = 0; i < n; ++i) A.row(i) = a.points[i].transpose();
    for (int j = 0; j < m; ++j) B.row(j) = b.points[j].transpose();
    Eigen::MatrixXd cost = -2.0 * A * B.transpose();
    cost.colwise() += A.rowwise().squaredNorm();
    cost.rowwise() += B.rowwise().squaredNorm().transpose();
    return cost.cwiseMax(0.0);
}

}  // namespace detail

/// Sinkhorn state that can be warm-started across refreshes of the cost
/// matrix (the potentials change slowly when the sources move slowly).
struct SinkhornState {
    Eigen::VectorXd f, g;  // log scalings
};

/// Log-domain Sinkhorn on the squared-Euclidean cost, costs divided by their
/// maximum before exponentiation, uniform marginals. Stops at `tolerance` on
/// the max marginal violation or at `maxIterations`.
inline TransportPlan sinkhorn_plan(const PointCloud& a, const PointCloud& b, double epsilon,
                                   int maxIterations, double tolerance,
                                   SinkhornState* state = nullptr) {
    if (a.empty() || b.empty()) throw std::invalid_argument("sinkhorn_plan: empty cloud");
    if (epsilon < 1e-12)
        throw std::invalid_argument(
            "sinkhorn_plan: epsilon too small for the cost scale; normalize costs or raise epsilon");
    const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());

    Eigen::MatrixXd cost = detail::squared_cost_matrix(a, b);
    const double maxCost = cost.maxCoeff();
    if (maxCost > 0.0) cost /= maxCost;
    const Eigen::MatrixXd logK = (-cost / epsilon).matrix();

    const double logMu = -std::log(static_cast<double>(n));
    const double logNu = -std::log(static_cast<double>(m));
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(m);
    if (state && state->f.size() == n && state->g.size() == m) { f = state->f; g = state->g; }

    auto rowLse = [&](Eigen::VectorXd& out) {
        // out_i = log sum_j exp(logK_ij + g_j)
        Eigen::MatrixXd shifted = logK;
        shifted.rowwise() += g.transpose();
        const Eigen::VectorXd rowMax = shifted.rowwise().maxCoeff();
        shifted.colwise() -= rowMax;
        out = (shifted.array().exp().rowwise().sum().log()).matrix() + rowMax;
    };
    auto colLse = [&](Eigen::VectorXd& out) {
        Eigen::MatrixXd shifted = logK;
        shifted.colwise() += f;
        const Eigen::VectorXd colMax = shifted.colwise().maxCoeff();
        shifted.rowwise() -= colMax.transpose();
        out = (shifted.array().exp().colwise().sum().log()).matrix().transpose() + colMax;
    };

    TransportPlan result;
    Eigen::VectorXd lse;
    auto marginalErrors = [&](const Eigen::MatrixXd& plan) {
        result.rowMarginalError = (plan.rowwise().sum().array() - 1.0 / n).abs().maxCoeff();
        result.colMarginalError = (plan.colwise().sum().array() - 1.0 / m).abs().maxCoeff();
    };

    // Building the plan for a marginal check costs a whole-matrix exp; on
    // large instances it is done every 10 iterations instead of every one.
    const bool small = static_cast<long>(n) * m <= 250000;
    int it = 0;
    for (; it < maxIterations; ++it) {
        rowLse(lse);
        f = Eigen::VectorXd::Constant(n, logMu) - lse;
        colLse(lse);
        g = Eigen::VectorXd::Constant(m, logNu) - lse;

        if (!small && (it + 1) % 10 != 0 && it + 1 != maxIterations) continue;
        Eigen::MatrixXd plan = logK;
        plan.colwise() += f;
        plan.rowwise() += g.transpose();
        plan = plan.array().exp().matrix();
        marginalErrors(plan);
        if (std::max(result.rowMarginalError, result.colMarginalError) < tolerance) {
            result.plan = std::move(plan);
            result.converged = true;
            ++it;
            break;
        }
        if (it + 1 == maxIterations) result.plan = std::move(plan);
    }
    if (!result.converged && result.plan.size() == 0) {
        Eigen::MatrixXd plan = logK;
        plan.colwise() += f;
        plan.rowwise() += g.transpose();
        result.plan = plan.array().exp().matrix();
        marginalErrors(result.plan);
    }
    if (!result.plan.allFinite())
        throw std::runtime_error("sinkhorn_plan: non-finite plan; normalize costs or raise epsilon");
    result.iterations = it;
    if (state) { state->f = f; state->g = g; }
    return result;
}

/// Per-source argmax of the plan rows; ties break to the lowest index.
inline Correspondence extract_correspondence(const TransportPlan& plan) {
    Correspondence c;
    c.targetOf.resize(plan.plan.rows());
    for (int i = 0; i < plan.plan.rows(); ++i) {
        int best = 0;
        double bestMass = plan.plan(i, 0);
        for (int j = 1; j < plan.plan.cols(); ++j) {
            if (plan.plan(i, j) > bestMass) { bestMass = plan.plan(i, j); best = j; }
        }
        c.targetOf[i] = best;
    }
    return c;
}

/// Per-target argmax of the plan columns: the source carrying the most mass
/// for each target point. Used when every target needs exactly one source.
inline std::vector<int> source_of_targets(const TransportPlan& plan) {
    std::vector<int> sourceOf(plan.plan.cols());
    for (int j = 0; j < plan.plan.cols(); ++j) {
        int best = 0;
        double bestMass = plan.plan(0, j);
        for (int i = 1; i < plan.plan.rows(); ++i) {
            if (plan.plan(i, j) > bestMass) { bestMass = plan.plan(i, j); best = i; }
        }
        sourceOf[j] = best;
    }
    return sourceOf;
}

}  // namespace isomesh
