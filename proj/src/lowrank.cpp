#include "lpc/lowrank.hpp"

#include <cmath>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>

#include "lpc/error.hpp"

namespace lpc {

Tensor3 Tensor3::from(const FeatureTensor& t) {
    Tensor3 out({t.channels(), t.height(), t.width()});
    std::copy(t.values().begin(), t.values().end(), out.data.begin());
    return out;
}

FeatureTensor Tensor3::to_feature_tensor() const {
    std::vector<float> values(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) values[i] = static_cast<float>(data[i]);
    return FeatureTensor(dims[0], dims[1], dims[2], std::move(values));
}

Eigen::MatrixXd svt(const Eigen::MatrixXd& A, double tau) {
    if (!(tau >= 0.0)) throw std::invalid_argument("svt: tau must be nonnegative");
    if (!A.allFinite()) throw NumericalError("svt: non-finite matrix entry");
    if (A.size() == 0) return A;

    const bool wide = A.rows() <= A.cols();
    const Eigen::Index n = wide ? A.rows() : A.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    if (wide)
        gram.selfadjointView<Eigen::Lower>().rankUpdate(A);
    else
        gram.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("svt: eigen-decomposition failed");

    const Eigen::VectorXd& lambda = eig.eigenvalues();
    Eigen::VectorXd factor(n);
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sigma = std::sqrt(std::max(lambda(i), 0.0));
        factor(i) = sigma > tau && sigma > 0.0 ? (sigma - tau) / sigma : 0.0;
        if (factor(i) > 0.0) ++kept;
    }
    if (kept == 0) return Eigen::MatrixXd::Zero(A.rows(), A.cols());

    // Eigenvalues ascend, so the surviving directions are the trailing columns.
    const Eigen::MatrixXd basis = eig.eigenvectors().rightCols(kept);
    const auto f = factor.tail(kept).asDiagonal();
    if (wide) return basis * (f * (basis.transpose() * A));
    return ((A * basis) * f) * basis.transpose();
}

Eigen::MatrixXd unfold(const Tensor3& t, int mode) {
    const auto [C, H, W] = t.dims;
    Eigen::MatrixXd m;
    switch (mode) {
    case 0:
        m.resize(static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(H * W));
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t r = 0; r < H; ++r)
                for (std::size_t w = 0; w < W; ++w)
                    m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r * W + w)) = t(c, r, w);
        break;
    case 1:
        m.resize(static_cast<Eigen::Index>(H), static_cast<Eigen::Index>(C * W));
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t r = 0; r < H; ++r)
                for (std::size_t w = 0; w < W; ++w)
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c * W + w)) = t(c, r, w);
        break;
    case 2:
        m.resize(static_cast<Eigen::Index>(W), static_cast<Eigen::Index>(C * H));
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t r = 0; r < H; ++r)
                for (std::size_t w = 0; w < W; ++w)
                    m(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(c * H + r)) = t(c, r, w);
        break;
    default:
        throw std::invalid_argument("unfold: mode must be 0, 1 or 2");
    }
    return m;
}

Tensor3 fold(const Eigen::MatrixXd& m, int mode, std::array<std::size_t, 3> dims) {
    if (mode < 0 || mode > 2) throw std::invalid_argument("fold: mode must be 0, 1 or 2");
    const auto [C, H, W] = dims;
    const std::size_t expected_rows = dims[static_cast<std::size_t>(mode)];
    const std::size_t expected_cols = C * H * W / (expected_rows ? expected_rows : 1);
    if (static_cast<std::size_t>(m.rows()) != expected_rows ||
        static_cast<std::size_t>(m.cols()) != expected_cols)
        throw std::invalid_argument("fold: matrix is " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + ", mode " + std::to_string(mode) +
                                    " needs " + std::to_string(expected_rows) + "x" +
                                    std::to_string(expected_cols));
    Tensor3 t(dims);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t r = 0; r < H; ++r)
            for (std::size_t w = 0; w < W; ++w) {
                Eigen::Index row = 0, col = 0;
                switch (mode) {
                case 0: row = static_cast<Eigen::Index>(c), col = static_cast<Eigen::Index>(r * W + w); break;
                case 1: row = static_cast<Eigen::Index>(r), col = static_cast<Eigen::Index>(c * W + w); break;
                default: row = static_cast<Eigen::Index>(w), col = static_cast<Eigen::Index>(c * H + r); break;
                }
                t(c, r, w) = m(row, col);
            }
    return t;
}

void SiLRTCParams::validate() const {
    double sum = 0.0;
    for (double a : alphas) {
        if (!(a >= 0.0)) throw std::invalid_argument("SiLRTCParams: alphas must be nonnegative");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("SiLRTCParams: alphas must sum to 1");
    for (double t : taus)
        if (!(t > 0.0)) throw std::invalid_argument("SiLRTCParams: taus must be positive");
    if (iterations < 1) throw std::invalid_argument("SiLRTCParams: iterations must be positive");
    if (!(stop_tol >= 0.0)) throw std::invalid_argument("SiLRTCParams: stop_tol must be >= 0");
}

SiLRTCResult silrtc(const Tensor3& input, const ObservationSet& omega, const SiLRTCParams& params) {
    params.validate();
    if (omega.dims != input.dims || omega.observed.size() != input.data.size())
        throw std::invalid_argument("silrtc: observation set does not match the tensor");

    std::vector<std::size_t> hidden;
    for (std::size_t i = 0; i < omega.observed.size(); ++i)
        if (!omega.observed[i]) hidden.push_back(i);
    if (hidden.size() == input.data.size())
        throw std::invalid_argument("silrtc: no observed entries");

    SiLRTCResult result{input, {}};
    Tensor3& X = result.tensor;
    for (std::size_t i : hidden) X.data[i] = 0.0;
    if (hidden.empty()) return result;

    const bool concurrent = std::thread::hardware_concurrency() > 1;
    std::vector<double> next(hidden.size());
    for (int it = 0; it < params.iterations; ++it) {
        auto shrink_mode = [&](int mode) {
            return fold(svt(unfold(X, mode), params.taus[static_cast<std::size_t>(mode)]), mode,
                        X.dims);
        };
        std::array<Tensor3, 3> modes;
        if (concurrent) {
            std::array<std::future<Tensor3>, 3> jobs;
            for (int m = 0; m < 3; ++m) jobs[static_cast<std::size_t>(m)] = std::async(std::launch::async, shrink_mode, m);
            for (std::size_t m = 0; m < 3; ++m) modes[m] = jobs[m].get();
        } else {
            for (int m = 0; m < 3; ++m) modes[static_cast<std::size_t>(m)] = shrink_mode(m);
        }

        double delta2 = 0.0, old2 = 0.0, new2 = 0.0;
        for (std::size_t k = 0; k < hidden.size(); ++k) {
            const std::size_t i = hidden[k];
            const double v = params.alphas[0] * modes[0].data[i] +
                             params.alphas[1] * modes[1].data[i] +
                             params.alphas[2] * modes[2].data[i];
            delta2 += (v - X.data[i]) * (v - X.data[i]);
            old2 += X.data[i] * X.data[i];
            new2 += v * v;
            next[k] = v;
        }
        for (std::size_t k = 0; k < hidden.size(); ++k) X.data[hidden[k]] = next[k];

        const double denom = std::sqrt(std::max(old2, new2));
        const double change = denom > 0.0 ? std::sqrt(delta2) / denom : 0.0;
        if (!std::isfinite(change)) throw NumericalError("silrtc: non-finite iterate");
        result.relative_change.push_back(change);
        if (change < params.stop_tol) break;
    }
    return result;
}

}  // namespace lpc
