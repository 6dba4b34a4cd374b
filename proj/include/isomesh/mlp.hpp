#pragma once

#include "isomesh/core.hpp"

#include <fstream>
#include <span>

namespace isomesh {

/// Training knobs shared by all three mapping stages.
struct TrainConfig {
    int epochs = 1000;
    double learningRate = 1e-3;
    std::uint64_t seed = 0;
    double alpha = 0.5;  // weight of the reference-mesh-based loss term
    double sinkhornEpsilon = 0.01;
    int sinkhornIterations = 500;
    double sinkhornTolerance = 1e-6;
    bool refreshCorrespondence = false;  // true for the global stage
    bool squaredLoss = false;            // mean of norms by default
};

/// Fully connected network with ReLU hidden layers and a linear output.
/// The mapping stages all use the fixed 3-128-256-512-512-3 architecture;
/// other shapes exist for tests.
class Mlp {
public:
    static std::vector<int> mapping_architecture() { return {3, 128, 256, 512, 512, 3}; }

    Mlp() = default;
    explicit Mlp(std::vector<int> layerSizes) : sizes_(std::move(layerSizes)) {
        if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least two layers");
        weights_.resize(sizes_.size() - 1);
        biases_.resize(sizes_.size() - 1);
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            weights_[l].setZero(sizes_[l], sizes_[l + 1]);
            biases_[l].setZero(sizes_[l + 1]);
        }
    }

    /// Fan-in-scaled uniform init, deterministic given the seed.
    void init(std::uint64_t seed) {
        Rng rng(seed);
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
            std::uniform_real_distribution<double> uni(-bound, bound);
            for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
                for (Eigen::Index j = 0; j < weights_[l].cols(); ++j) weights_[l](i, j) = uni(rng);
            for (Eigen::Index j = 0; j < biases_[l].size(); ++j) biases_[l](j) = uni(rng);
        }
    }

    int inputWidth() const { return sizes_.front(); }
    int outputWidth() const { return sizes_.back(); }
    const std::vector<int>& layerSizes() const { return sizes_; }
    std::vector<Eigen::MatrixXd>& weights() { return weights_; }
    std::vector<Eigen::VectorXd>& biases() { return biases_; }
    const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
    const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

    /// Batched forward pass; rows are points.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd h = x;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            h = (h * weights_[l]).rowwise() + biases_[l].transpose();
            if (l + 1 < weights_.size()) h = h.cwiseMax(0.0);
        }
        return h;
    }

    Vec3 forward(const Vec3& p) const {
        Eigen::MatrixXd x(1, 3);
        x.row(0) = p.transpose();
        return forward(x).row(0).transpose();
    }

    /// Forward pass keeping post-activation values per layer for backprop.
    void forward_cached(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& acts) const {
        acts.resize(weights_.size() + 1);
        acts[0] = x;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            acts[l + 1] = (acts[l] * weights_[l]).rowwise() + biases_[l].transpose();
            if (l + 1 < weights_.size()) acts[l + 1] = acts[l + 1].cwiseMax(0.0);
        }
    }

    /// Backprop from dL/dOutput. `acts` must come from forward_cached on the
    /// same parameters. Gradients are accumulated into gradW/gradB.
    void backward(const std::vector<Eigen::MatrixXd>& acts, const Eigen::MatrixXd& gradOut,
                  std::vector<Eigen::MatrixXd>& gradW, std::vector<Eigen::VectorXd>& gradB) const {
        Eigen::MatrixXd delta = gradOut;
        for (int l = static_cast<int>(weights_.size()) - 1; l >= 0; --l) {
            gradW[l].noalias() += acts[l].transpose() * delta;
            gradB[l] += delta.colwise().sum().transpose();
            if (l > 0) {
                delta = delta * weights_[l].transpose();
                // ReLU mask from the stored post-activation values.
                delta = (acts[l].array() > 0.0).select(delta, 0.0);
            }
        }
    }

    void save_checkpoint(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        const char magic[4] = {'I', 'M', 'L', 'P'};
        out.write(magic, 4);
        const std::uint32_t nLayers = static_cast<std::uint32_t>(sizes_.size());
        out.write(reinterpret_cast<const char*>(&nLayers), 4);
        for (int s : sizes_) {
            const std::uint32_t u = static_cast<std::uint32_t>(s);
            out.write(reinterpret_cast<const char*>(&u), 4);
        }
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            out.write(reinterpret_cast<const char*>(weights_[l].data()),
                      weights_[l].size() * sizeof(double));
            out.write(reinterpret_cast<const char*>(biases_[l].data()),
                      biases_[l].size() * sizeof(double));
        }
    }

    static Mlp load_checkpoint(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open '" + path + "'");
        char magic[4];
        in.read(magic, 4);
        if (!in || std::string(magic, 4) != "IMLP")
            throw std::runtime_error("'" + path + "' is not a checkpoint file");
        std::uint32_t nLayers = 0;
        in.read(reinterpret_cast<char*>(&nLayers), 4);
        if (!in || nLayers < 2 || nLayers > 64)
            throw std::runtime_error("'" + path + "': bad layer count");
        std::vector<int> sizes(nLayers);
        for (auto& s : sizes) {
            std::uint32_t u = 0;
            in.read(reinterpret_cast<char*>(&u), 4);
            s = static_cast<int>(u);
        }
        Mlp mlp(sizes);
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            in.read(reinterpret_cast<char*>(mlp.weights_[l].data()),
                    mlp.weights_[l].size() * sizeof(double));
            in.read(reinterpret_cast<char*>(mlp.biases_[l].data()),
                    mlp.biases_[l].size() * sizeof(double));
        }
        if (!in) throw std::runtime_error("'" + path + "': truncated checkpoint");
        return mlp;
    }

private:
    std::vector<int> sizes_;
    std::vector<Eigen::MatrixXd> weights_;  // sizes_[l] x sizes_[l+1]
    std::vector<Eigen::VectorXd> biases_;
};

/// Adam state matching one network's parameter layout.
class AdamOptimizer {
public:
    explicit AdamOptimizer(const Mlp& mlp, double lr = 1e-3, double beta1 = 0.9,
                           double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto& w : mlp.weights()) {
            mW_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
            vW_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        }
        for (const auto& b : mlp.biases()) {
            mB_.push_back(Eigen::VectorXd::Zero(b.size()));
            vB_.push_back(Eigen::VectorXd::Zero(b.size()));
        }
    }

    void step(Mlp& mlp, const std::vector<Eigen::MatrixXd>& gradW,
              const std::vector<Eigen::VectorXd>& gradB) {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, t_);
        const double c2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t l = 0; l < gradW.size(); ++l) {
            mW_[l] = beta1_ * mW_[l] + (1.0 - beta1_) * gradW[l];
            vW_[l] = beta2_ * vW_[l] + (1.0 - beta2_) * gradW[l].cwiseProduct(gradW[l]);
            mlp.weights()[l] -=
                (lr_ * (mW_[l] / c1).array() / ((vW_[l] / c2).array().sqrt() + eps_)).matrix();
            mB_[l] = beta1_ * mB_[l] + (1.0 - beta1_) * gradB[l];
            vB_[l] = beta2_ * vB_[l] + (1.0 - beta2_) * gradB[l].cwiseProduct(gradB[l]);
            mlp.biases()[l] -=
                (lr_ * (mB_[l] / c1).array() / ((vB_[l] / c2).array().sqrt() + eps_)).matrix();
        }
    }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Eigen::MatrixXd> mW_, vW_;
    std::vector<Eigen::VectorXd> mB_, vB_;
};

/// One term of the training loss: (weight / normalizer) * sum ||f(x) - t||
/// over the rows of inputs/targets.
struct PairSet {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
    double weight = 1.0;
    double normalizer = 1.0;
};

struct TrainReport {
    double finalLoss = 0.0;
    int epochsRun = 0;
    bool diverged = false;       // non-finite loss; caller should restart
    bool converged = false;      // loss non-increasing over the trailing window
    std::vector<double> lossHistory;
};

namespace detail {

/// Loss and dL/dOutput of one pair set under the current predictions.
inline double pairset_loss_grad(const PairSet& set, const Eigen::MatrixXd& pred,
                                bool squared, Eigen::MatrixXd& gradOut) {
    const double scale = set.weight / set.normalizer;
    const Eigen::MatrixXd diff = pred - set.targets;
    double loss = 0.0;
    gradOut.setZero(pred.rows(), pred.cols());
    if (squared) {
        loss = scale * diff.rowwise().squaredNorm().sum();
        gradOut = 2.0 * scale * diff;
    } else {
        for (Eigen::Index i = 0; i < diff.rows(); ++i) {
            const double d = diff.row(i).norm();
            loss += scale * d;
            if (d > 1e-300) gradOut.row(i) = scale * diff.row(i) / d;
        }
    }
    return loss;
}

}  // namespace detail

/// Full-batch Adam training on the configured loss over one or two pair
/// sets. Correspondences are frozen by the caller; this loop never reorders
/// or recomputes pairs.
inline TrainReport mlp_train(Mlp& mlp, std::span<const PairSet> sets, int epochs,
                             double learningRate, bool squaredLoss = false,
                             AdamOptimizer* optimizer = nullptr) {
    if (sets.empty()) throw std::invalid_argument("mlp_train: no pair sets");
    for (const auto& s : sets)
        if (s.inputs.rows() != s.targets.rows())
            throw std::invalid_argument("mlp_train: inputs/targets size mismatch");

    AdamOptimizer local(mlp, learningRate);
    AdamOptimizer& adam = optimizer ? *optimizer : local;

    TrainReport report;
    report.lossHistory.reserve(epochs);
    std::vector<Eigen::MatrixXd> gradW(mlp.weights().size());
    std::vector<Eigen::VectorXd> gradB(mlp.biases().size());
    std::vector<Eigen::MatrixXd> acts;
    Eigen::MatrixXd gradOut;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t l = 0; l < gradW.size(); ++l) {
            gradW[l].setZero(mlp.weights()[l].rows(), mlp.weights()[l].cols());
            gradB[l].setZero(mlp.biases()[l].size());
        }
        double loss = 0.0;
        for (const auto& set : sets) {
            if (set.weight == 0.0) continue;  // inert term contributes nothing
            mlp.forward_cached(set.inputs, acts);
            loss += detail::pairset_loss_grad(set, acts.back(), squaredLoss, gradOut);
            mlp.backward(acts, gradOut, gradW, gradB);
        }
        report.lossHistory.push_back(loss);
        ++report.epochsRun;
        if (!std::isfinite(loss)) {
            report.diverged = true;
            report.finalLoss = loss;
            return report;
        }
        adam.step(mlp, gradW, gradB);
    }
    report.finalLoss = report.lossHistory.empty() ? 0.0 : report.lossHistory.back();

    // Convergence: the trailing 10-epoch window is non-increasing on average
    // relative to the window before it.
    const auto& h = report.lossHistory;
    if (h.size() >= 20) {
        double tail = 0.0, prev = 0.0;
        for (std::size_t i = h.size() - 10; i < h.size(); ++i) tail += h[i];
        for (std::size_t i = h.size() - 20; i < h.size() - 10; ++i) prev += h[i];
        report.converged = tail <= prev * (1.0 + 1e-12);
    } else {
        report.converged = h.empty() || h.back() <= h.front() * (1.0 + 1e-12);
    }
    return report;
}

/// Normal penalty between two meshes with identical connectivity: mean dot
/// product of per-vertex normals. Vertices with a degenerate normal on
/// either side are excluded and counted.
struct NormalPenalty {
    double value = 0.0;
    int excludedVertices = 0;
};

inline NormalPenalty normal_penalty(const TriangleMesh& before, const TriangleMesh& after) {
    if (before.vertices.size() != after.vertices.size() ||
        before.patches.size() != after.patches.size())
        throw std::invalid_argument("normal_penalty: connectivity mismatch");
    const auto nb = vertex_normals(before);
    const auto na = vertex_normals(after);
    NormalPenalty result;
    double sum = 0.0;
    int counted = 0;
    for (std::size_t v = 0; v < nb.size(); ++v) {
        if (nb[v].isZero() || na[v].isZero()) {
            ++result.excludedVertices;
            continue;
        }
        sum += nb[v].dot(na[v]);
        ++counted;
    }
    result.value = counted > 0 ? sum / counted : 0.0;
    return result;
}

}  // namespace isomesh
